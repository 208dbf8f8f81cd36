use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use clap::ArgMatches;
use serde::Serialize;
use vernacular::ingest::{
    buildings_from_detections, derive_types, format_trait_csv, read_detections, read_trait_csv,
    stratified_split, BuildingRecord, SplitPolicy,
};
use vernacular::neighbornet::{delta_score, fit_network, NnlsOptions};
use vernacular::njtree::{ls_fit, ls_fit_values, nj, to_newick, tree_path_lengths};
use vernacular::seriation::{
    battleship_svg, brute_force_seriate, order_csv, seriate, segment_order, BRUTE_FORCE_LIMIT,
};
use vernacular::simulate::{diagnose_with, simulate, SimConfig, SimMode, DEFAULT_BORROW_RATE};
use vernacular::splitsgraph::{
    build_splits_graph, cluster_styles, equal_angle_layout, format_graph, format_interchange,
    read_interchange, to_dot, to_svg, verify_graph_metric, StyleClusters,
};
use vernacular::stats::{phi_correlation, trait_frequencies};
use vernacular::{
    distance_matrix, format_distance_csv, read_distance_csv, DistanceMatrix, Error, Metric, Result,
    TraitCatalog, TraitMatrix,
};

use super::output::Run;
use super::{
    ClusterArgs, Command, DiagnoseArgs, DistanceInput, GraphArgs, IngestArgs, NjArgs, NnetArgs,
    SeriateArgs, SimulateArgs, SplitDatasetArgs, StatsArgs, TypesArgs,
};

pub(crate) fn dispatch(command: Command, m: &ArgMatches) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a, m),
        Command::Stats(a) => stats(a, m),
        Command::Types(a) => types(a, m),
        Command::SplitDataset(a) => split_dataset(a, m),
        Command::Seriate(a) => seriate_cmd(a, m),
        Command::Nj(a) => nj_cmd(a, m),
        Command::Nnet(a) => nnet(a, m),
        Command::Graph(a) => graph(a, m),
        Command::Cluster(a) => cluster(a, m),
        Command::Simulate(a) => simulate_cmd(a, m),
        Command::Diagnose(a) => diagnose_cmd(a, m),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn lines(items: &[String]) -> String {
    items.iter().map(|s| format!("{s}\n")).collect()
}

fn report(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn traits(run: &mut Run, path: &Path) -> Result<TraitMatrix> {
    run.input(path);
    read_trait_csv(path)
}

/// Loads or computes the distance matrix; computed matrices are also written
/// out as `distances.csv`.
fn distances(run: &mut Run, src: &DistanceInput, metric: Metric) -> Result<DistanceMatrix> {
    if let Some(p) = &src.distances {
        run.input(p);
        return read_distance_csv(p);
    }
    let path = src.input.as_ref().expect("clap enforces one source");
    let d = distance_matrix(&traits(run, path)?, metric)?;
    run.output("distances.csv", format_distance_csv(&d)?);
    Ok(d)
}

fn ingest(a: IngestArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("ingest", m);
    let (catalog, buildings) = if let Some(p) = &a.detections {
        if !(0.0..=1.0).contains(&a.confidence) {
            return Err(Error::Validation(format!(
                "confidence threshold {} outside [0, 1]",
                a.confidence
            )));
        }
        run.input(p);
        let catalog = TraitCatalog::facade();
        let records = read_detections(p)?;
        let buildings = buildings_from_detections(&records, &catalog, a.confidence)?;
        (catalog, buildings)
    } else {
        let p = a.traits.as_ref().expect("clap enforces one source");
        let matrix = traits(&mut run, p)?;
        let buildings = matrix
            .taxa()
            .iter()
            .zip(matrix.rows())
            .map(|(id, v)| BuildingRecord::new(id.clone(), v.clone(), Vec::new()))
            .collect::<Vec<_>>();
        (matrix.catalog().clone(), buildings)
    };
    if buildings.is_empty() {
        return Err(Error::EmptyInput("no buildings in input".into()));
    }
    let matrix = TraitMatrix::new(
        catalog,
        buildings.iter().map(|b| b.building_id.clone()).collect(),
        buildings.iter().map(|b| b.vector.clone()).collect(),
    )?;
    run.output("traits.csv", format_trait_csv(&matrix)?);

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let werr = |e: csv::Error| Error::Validation(format!("csv write: {e}"));
    w.write_record(["building_id", "variant", "source_images"]).map_err(werr)?;
    for b in &buildings {
        w.write_record([
            b.building_id.as_str(),
            if b.variant_flag { "1" } else { "0" },
            &b.source_images.join("|"),
        ])
        .map_err(werr)?;
    }
    run.output("buildings.csv", w.into_inner().map_err(|e| Error::Validation(e.to_string()))?);
    let variants = buildings.iter().filter(|b| b.variant_flag).count();
    run.output(
        "summary.txt",
        report(&[("buildings", buildings.len().to_string()), ("variants", variants.to_string())]),
    );
    run.finish(&a.common.out_dir)
}

#[derive(Serialize)]
struct FrequencyRow {
    #[serde(rename = "trait")]
    name: String,
    count: usize,
    percentage: f64,
}

#[derive(Serialize)]
struct PhiReport {
    traits: Vec<String>,
    values: Vec<Vec<f64>>,
    constant: Vec<String>,
}

#[derive(Serialize)]
struct StatsReport {
    n_taxa: usize,
    n_traits: usize,
    frequencies: Vec<FrequencyRow>,
    phi: PhiReport,
}

fn stats(a: StatsArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("stats", m);
    let matrix = traits(&mut run, &a.input)?;
    let frequencies = trait_frequencies(&matrix)?
        .into_iter()
        .map(|f| FrequencyRow {
            name: f.name,
            count: f.count,
            percentage: (f.percentage * 100.0).round() / 100.0,
        })
        .collect();
    let phi = phi_correlation(&matrix)?;
    let constant = phi
        .names
        .iter()
        .zip(&phi.constant)
        .filter(|(_, &c)| c)
        .map(|(n, _)| n.clone())
        .collect();
    let out = StatsReport {
        n_taxa: matrix.n_taxa(),
        n_traits: matrix.n_traits(),
        frequencies,
        phi: PhiReport {
            traits: phi.names,
            values: phi.values,
            constant,
        },
    };
    let mut json = serde_json::to_string_pretty(&out).map_err(|e| Error::Validation(e.to_string()))?;
    json.push('\n');
    run.output("stats.json", json);
    run.finish(&a.common.out_dir)
}

fn types(a: TypesArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("types", m);
    let matrix = traits(&mut run, &a.input)?;
    let buildings: Vec<BuildingRecord> = matrix
        .taxa()
        .iter()
        .zip(matrix.rows())
        .map(|(id, v)| BuildingRecord::new(id.clone(), v.clone(), Vec::new()))
        .collect();
    let derived = derive_types(&buildings, a.threshold)?;
    let catalog = &derived.catalog;
    run.output("types.csv", catalog.to_csv(matrix.catalog())?);
    if !catalog.is_empty() {
        run.output(
            "type_matrix.csv",
            format_trait_csv(&catalog.to_trait_matrix(matrix.catalog())?)?,
        );
    }
    let mut members = String::from("type_id,building_id\n");
    for e in &catalog.entries {
        for b in &e.members {
            members.push_str(&format!("{},{b}\n", e.type_id));
        }
    }
    run.output("type_members.csv", members);
    run.output("leftovers.txt", lines(&derived.leftover_ids));
    run.output("variants.txt", lines(&derived.variant_ids));
    let typed: usize = catalog.entries.iter().map(|e| e.count).sum();
    run.output(
        "summary.txt",
        report(&[
            ("buildings", buildings.len().to_string()),
            ("threshold", a.threshold.to_string()),
            ("types", catalog.len().to_string()),
            ("typed_buildings", typed.to_string()),
            ("leftovers", derived.leftover_ids.len().to_string()),
            ("variants", derived.variant_ids.len().to_string()),
        ]),
    );
    run.finish(&a.common.out_dir)
}

fn split_dataset(a: SplitDatasetArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("split-dataset", m);
    run.input(&a.input);
    let text = read_text(&a.input)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["class", "instance_id"] {
        return Err(Error::parse(1, "header must be `class,instance_id`"));
    }
    let mut classes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(i + 2, e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::parse(i + 2, "expected two cells"));
        }
        classes.entry(rec[0].to_string()).or_default().push(rec[1].to_string());
    }
    let policy = SplitPolicy {
        rare_cutoff: a.rare_cutoff,
        rare: a.rare_ratio,
        common: a.common_ratio,
    };
    let split = stratified_split(&classes, &policy, a.common.seed)?;
    run.output("split.csv", split.to_csv());
    let mut summary = String::from("class,instances,train,validation,test\n");
    for (class, s) in &split.classes {
        let (tr, va, te) = s.sizes();
        summary.push_str(&format!("{class},{},{tr},{va},{te}\n", tr + va + te));
    }
    run.output("split_summary.csv", summary);
    run.finish(&a.common.out_dir)
}

fn seriate_cmd(a: SeriateArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("seriate", m);
    let matrix = traits(&mut run, &a.input)?;
    let n = matrix.n_taxa();
    let result = match a.method.as_str() {
        "brute-force" => brute_force_seriate(&matrix)?,
        "auto" if n <= BRUTE_FORCE_LIMIT => brute_force_seriate(&matrix)?,
        _ => seriate(&matrix, a.restarts, a.common.seed)?,
    };
    run.output("seriation.csv", order_csv(&matrix, &result)?);
    run.output("seriation.svg", battleship_svg(&matrix, &result.order)?);
    run.output("seriated.csv", format_trait_csv(&matrix.reordered(&result.order)?)?);
    if a.groups > 0 {
        let d = distance_matrix(&matrix, a.common.metric)?;
        let groups = segment_order(&result, &d, a.groups)?;
        let mut out = String::from("taxon,group\n");
        for (g, members) in groups.iter().enumerate() {
            for &t in members {
                out.push_str(&format!("{},{}\n", matrix.taxa()[t], g + 1));
            }
        }
        run.output("groups.csv", out);
    }
    run.output(
        "seriation_report.txt",
        report(&[
            ("method", result.method.name().to_string()),
            ("criterion", result.criterion.to_string()),
            ("n_taxa", n.to_string()),
        ]),
    );
    run.finish(&a.common.out_dir)
}

fn nj_cmd(a: NjArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("nj", m);
    let d = distances(&mut run, &a.source, a.common.metric)?;
    let tree = nj(&d, a.clamp_negative)?;
    run.output("tree.nwk", format!("{}\n", to_newick(&tree, a.precision)));
    let negative = tree.edges().iter().filter(|e| e.length < 0.0).count();
    let fit = ls_fit_values(&d, &tree_path_lengths(&tree))?;
    run.output(
        "nj_report.txt",
        report(&[
            ("n_taxa", d.len().to_string()),
            ("tree_fit", fit.to_string()),
            ("negative_branches", negative.to_string()),
        ]),
    );
    run.finish(&a.common.out_dir)
}

fn nnet(a: NnetArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("nnet", m);
    if !(a.weight_threshold >= 0.0 && a.tol > 0.0) {
        return Err(Error::Validation("weight threshold must be ≥ 0 and tol > 0".into()));
    }
    let d = distances(&mut run, &a.source, a.common.metric)?;
    let opts = NnlsOptions {
        tol: a.tol,
        ..NnlsOptions::default()
    };
    let fit = fit_network(&d, a.weight_threshold, opts)?;
    let s = &fit.system;
    let delta = if d.len() >= 4 {
        delta_score(&d, None, a.common.seed)?.to_string()
    } else {
        "na".to_string()
    };
    let network_fit = ls_fit(&d, &s.split_metric())?;
    let cycle: Vec<&str> = s.ordering().cycle().iter().map(|&t| s.labels()[t].as_str()).collect();
    run.output("splits.txt", format_interchange(s));
    run.output("splits.csv", s.to_csv());
    run.output(
        "nnet_report.txt",
        report(&[
            ("n_taxa", d.len().to_string()),
            ("n_splits", s.len().to_string()),
            ("incompatible_pairs", s.incompatible_pairs().len().to_string()),
            ("delta", delta),
            ("network_fit", network_fit.to_string()),
            ("nnls_iterations", fit.solution.iterations.to_string()),
            ("nnls_residual", format!("{:e}", fit.solution.residual)),
            ("kkt_violation", format!("{:e}", fit.solution.kkt_violation)),
            ("cycle", cycle.join(" ")),
        ]),
    );
    run.finish(&a.common.out_dir)
}

fn read_clusters(path: &Path, labels: &[String]) -> Result<StyleClusters> {
    let text = read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut by_label: HashMap<String, usize> = HashMap::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(line, e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::parse(line, "expected `taxon,cluster`"));
        }
        let c: usize = rec[1]
            .trim()
            .parse()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| Error::parse(line, format!("bad cluster id `{}`", &rec[1])))?;
        by_label.insert(rec[0].to_string(), c);
    }
    let assignment = labels
        .iter()
        .map(|l| {
            by_label
                .get(l)
                .copied()
                .ok_or_else(|| Error::Validation(format!("taxon `{l}` has no cluster")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StyleClusters {
        k: assignment.iter().copied().max().unwrap_or(0),
        assignment,
        method: "file".into(),
    })
}

fn graph(a: GraphArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("graph", m);
    run.input(&a.splits);
    let s = read_interchange(&a.splits)?;
    let mut g = build_splits_graph(&s)?;
    g.set_coords(equal_angle_layout(&g, &s)?)?;
    let clusters = match &a.clusters {
        Some(p) => {
            run.input(p);
            Some(read_clusters(p, s.labels())?)
        }
        None => None,
    };
    run.output("graph.txt", format_graph(&g));
    run.output("graph.dot", to_dot(&g, clusters.as_ref()));
    run.output("graph.svg", to_svg(&g, clusters.as_ref())?);
    if g.is_tree() {
        run.output("tree.nwk", format!("{}\n", to_newick(&g.to_tree()?, a.precision)));
    }
    run.output(
        "graph_report.txt",
        report(&[
            ("n_taxa", s.n_taxa().to_string()),
            ("n_splits", s.len().to_string()),
            ("nodes", g.n_nodes().to_string()),
            ("edges", g.edges().len().to_string()),
            ("cycle_rank", g.cycle_rank().to_string()),
            ("is_tree", g.is_tree().to_string()),
            ("metric_error", format!("{:e}", verify_graph_metric(&g, &s))),
        ]),
    );
    run.finish(&a.common.out_dir)
}

fn cluster(a: ClusterArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("cluster", m);
    let d = distances(&mut run, &a.source, a.common.metric)?;
    let c = cluster_styles(&d, a.k)?;
    run.output("clusters.csv", c.to_csv(d.labels()));
    run.param("method", &c.method);
    run.finish(&a.common.out_dir)
}

fn simulate_cmd(a: SimulateArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("simulate", m);
    let borrow_rate = a.borrow_rate.unwrap_or(if a.mode == SimMode::Network {
        DEFAULT_BORROW_RATE
    } else {
        0.0
    });
    run.param("borrow-rate", borrow_rate);
    let cfg = SimConfig {
        mode: a.mode,
        n_taxa: a.n_taxa,
        n_traits: a.n_traits,
        flip_rate: a.flip_rate,
        borrow_rate,
        seed: a.common.seed,
    };
    let r = simulate(&cfg)?;
    let diagnosis = diagnose_with(&r.matrix, a.common.metric, a.common.seed)?;
    run.output("traits.csv", format_trait_csv(&r.matrix)?);
    run.output("truth.txt", r.truth_text());
    run.output("history.txt", r.history.iter().map(|e| format!("{e}\n")).collect::<String>());
    run.output("diagnosis.txt", diagnosis.to_text());
    run.finish(&a.common.out_dir)
}

fn diagnose_cmd(a: DiagnoseArgs, m: &ArgMatches) -> Result<()> {
    let mut run = Run::new("diagnose", m);
    let matrix = traits(&mut run, &a.input)?;
    let diagnosis = diagnose_with(&matrix, a.common.metric, a.common.seed)?;
    run.output("diagnosis.txt", diagnosis.to_text());
    run.finish(&a.common.out_dir)
}
