use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use uabs_hetnet::gaopt::GaProblem;
use uabs_hetnet::harness::{
    drop_scenario, realize_drop, run_experiment, sweep_cre_modes, AggregateResult, Deployment, DropKey, ExperimentSpec,
};
use uabs_hetnet::hexopt::grid_search_links;
use uabs_hetnet::io;
use uabs_hetnet::propagation::path_loss_cdf;
use uabs_hetnet::radio::{build_links, evaluate_links, FadingField, IcicMode, IcicParams, SeReport};
use uabs_hetnet::scenario::{generate_ppp_layout, NetworkLayout};
use uabs_hetnet::seed::rng_from_seed;

use crate::config::RunConfig;

fn write_with(path: &Path, f: impl FnOnce(std::fs::File) -> uabs_hetnet::Result<()>) -> Result<()> {
    let file = io::create(path).with_context(|| format!("creating {}", path.display()))?;
    f(file).with_context(|| format!("writing {}", path.display()))
}

fn tag(n_uabs: usize, destroy_fraction: f64) -> String {
    format!("u{n_uabs}_d{destroy_fraction}")
}

#[derive(Serialize)]
struct LayoutSummary {
    file: String,
    n_uabs: usize,
    destroy_fraction: f64,
    drop: usize,
    n_mbs_deployed: usize,
    n_mbs: usize,
    n_ue: usize,
}

pub fn scenario(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.spec_for(cfg.spec.deployment)?;
    let dir = cfg.dir("scenario");
    let mut summary = Vec::new();
    for key in spec.cells() {
        let deployed = generate_ppp_layout(&drop_scenario(&spec, &key))?.n_mbs();
        let layout = realize_drop(&spec, &key)?.layout;
        let stem = format!("{}_drop{}", tag(key.n_uabs, key.destroy_fraction), key.drop);
        let file = format!("layout_{stem}.csv");
        write_with(&dir.join(&file), |f| io::write_layout_csv(&layout, f))?;
        let cdf = path_loss_cdf(&layout, &spec.model)?;
        write_with(&dir.join(format!("pathloss_cdf_{stem}.csv")), |f| {
            io::write_cdf_csv(&cdf, f)
        })?;
        summary.push(LayoutSummary {
            file,
            n_uabs: key.n_uabs,
            destroy_fraction: key.destroy_fraction,
            drop: key.drop,
            n_mbs_deployed: deployed,
            n_mbs: layout.n_mbs(),
            n_ue: layout.n_ue(),
        });
        cfg.note(format!("scenario {stem}: {} MBS of {deployed}", layout.n_mbs()));
    }
    write_with(&dir.join("summary.json"), |f| io::write_json(&summary, f))?;
    println!("wrote {} layouts to {}", summary.len(), dir.display());
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.spec_for(Deployment::Hex)?;
    let start = Instant::now();
    let curves = sweep_cre_modes(&spec, &cfg.taus_db, &IcicMode::ALL)?;
    cfg.note(format!("sweep finished in {:.1} s", start.elapsed().as_secs_f64()));
    let dir = cfg.dir("sweep");
    for mode in IcicMode::ALL {
        let mine: Vec<_> = curves.iter().filter(|c| c.mode == mode).cloned().collect();
        let path = dir.join(format!("sweep_{}.csv", mode.as_str()));
        write_with(&path, |f| io::write_sweep_csv(&mine, f))?;
        for c in &mine {
            println!(
                "{} u{} d{}: peak at {} dB",
                mode.as_str(),
                c.n_uabs,
                c.destroy_fraction,
                c.peak_tau_db()
            );
        }
    }
    Ok(())
}

/// Summary of a single-drop optimization. `fading_seed` together with the
/// written layout and parameters is enough to re-score the result.
#[derive(Serialize)]
struct SingleRun {
    deployment: Deployment,
    mode: IcicMode,
    n_uabs: usize,
    destroy_fraction: f64,
    drop: usize,
    master_seed: u64,
    fading_seed: u64,
    fifth_pse: f64,
    elapsed_s: f64,
    params: IcicParams,
}

fn single_key(spec: &ExperimentSpec, drop: usize) -> Result<DropKey> {
    if drop >= spec.n_drops {
        bail!("drop {drop} out of range (n_drops = {})", spec.n_drops);
    }
    Ok(DropKey {
        n_uabs: spec.n_uabs_list[0],
        destroy_fraction: spec.destroy_fractions[0],
        drop,
    })
}

fn write_single(
    dir: &Path,
    spec: &ExperimentSpec,
    key: &DropKey,
    layout: &NetworkLayout,
    report: &SeReport,
    elapsed_s: f64,
) -> Result<()> {
    let run = SingleRun {
        deployment: spec.deployment,
        mode: spec.icic_mode,
        n_uabs: key.n_uabs,
        destroy_fraction: key.destroy_fraction,
        drop: key.drop,
        master_seed: spec.master_seed,
        fading_seed: key.fading_seed(spec.master_seed),
        fifth_pse: report.fifth_percentile_se,
        elapsed_s,
        params: report.params_used,
    };
    write_with(&dir.join("layout.csv"), |f| io::write_layout_csv(layout, f))?;
    write_with(&dir.join("params.json"), |f| io::write_json(&report.params_used, f))?;
    write_with(&dir.join("report.json"), |f| io::write_report_json(report, f))?;
    write_with(&dir.join("ue.csv"), |f| io::write_ue_csv(report, f))?;
    write_with(&dir.join("result.json"), |f| io::write_json(&run, f))?;
    println!(
        "{} {} u{} d{} drop {}: 5pSE {} bps/Hz (fading seed {})",
        spec.deployment.as_str(),
        spec.icic_mode.as_str(),
        key.n_uabs,
        key.destroy_fraction,
        key.drop,
        run.fifth_pse,
        run.fading_seed
    );
    Ok(())
}

pub fn optimize(cfg: &RunConfig, drop: usize) -> Result<()> {
    let spec = cfg.spec_for(Deployment::Ga)?;
    let key = single_key(&spec, drop)?;
    let real = realize_drop(&spec, &key)?;
    let bounds = spec.bounds();
    let ga = spec.ga.with_seed(key.optimizer_seed(spec.master_seed));
    let start = Instant::now();
    let problem = GaProblem::new(&real.layout, &spec.model, real.fading.clone(), spec.beta, spec.settings)?;
    let out = problem.optimize_observed(&ga, &bounds, &[], |g, _| {
        cfg.note(format!("generation {g}"));
    })?;
    let elapsed_s = start.elapsed().as_secs_f64();
    let (layout, _) = uabs_hetnet::gaopt::decode(&out.best, &real.layout, &bounds, spec.beta)?;
    let dir = cfg.dir("optimize");
    write_with(&dir.join("history.csv"), |f| io::write_history_csv(&out.history, f))?;
    write_single(&dir, &spec, &key, &layout, &out.best_report, elapsed_s)
}

pub fn hexsearch(cfg: &RunConfig, drop: usize) -> Result<()> {
    let spec = cfg.spec_for(Deployment::Hex)?;
    let key = single_key(&spec, drop)?;
    let real = realize_drop(&spec, &key)?;
    let grid = spec.grid.for_mode(spec.icic_mode);
    let start = Instant::now();
    let links = build_links(&real.layout, &spec.model, &real.fading)?;
    let r = grid_search_links(
        &links,
        real.layout.n_mbs(),
        real.layout.n_uabs(),
        &grid,
        spec.beta,
        &spec.settings,
    )?;
    let elapsed_s = start.elapsed().as_secs_f64();
    let dir = cfg.dir("hexsearch");
    write_with(&dir.join("grid.csv"), |f| io::write_grid_csv(&r.points, f))?;
    write_single(&dir, &spec, &key, &real.layout, &r.best_report, elapsed_s)
}

pub fn evaluate(cfg: &RunConfig, layout_path: &Path, params_path: &Path, fading_seed: u64) -> Result<()> {
    let powers = cfg.spec.scenario.powers;
    let file = std::fs::File::open(layout_path).with_context(|| format!("opening {}", layout_path.display()))?;
    let layout = io::read_layout_csv(file, powers.mbs_eff_dbm(), powers.uabs_eff_dbm())
        .with_context(|| format!("reading {}", layout_path.display()))?;
    let file = std::fs::File::open(params_path).with_context(|| format!("opening {}", params_path.display()))?;
    let params: IcicParams = io::read_json(file).with_context(|| format!("reading {}", params_path.display()))?;
    params.validate()?;
    cfg.spec.model.validate()?;

    let fading = FadingField::for_layout(&mut rng_from_seed(fading_seed), &layout);
    let links = build_links(&layout, &cfg.spec.model, &fading)?;
    let report = evaluate_links(&links, layout.n_mbs(), layout.n_uabs(), &params, &cfg.spec.settings)?;
    let dir = cfg.dir("evaluate");
    write_with(&dir.join("report.json"), |f| io::write_report_json(&report, f))?;
    write_with(&dir.join("ue.csv"), |f| io::write_ue_csv(&report, f))?;
    println!("5pSE {} bps/Hz over {} UEs", report.fifth_percentile_se, report.n_ue());
    Ok(())
}

#[derive(Serialize)]
struct RuntimeRow {
    n_uabs: usize,
    destroy_fraction: f64,
    hex_elapsed_s: f64,
    ga_elapsed_s: f64,
    hex_fifth_pse: f64,
    ga_fifth_pse: f64,
}

pub fn bench(cfg: &RunConfig) -> Result<()> {
    let dir = cfg.dir("bench");
    let mut results: Vec<AggregateResult> = Vec::new();
    for deployment in [Deployment::Hex, Deployment::Ga] {
        let spec = cfg.spec_for(deployment)?;
        let start = Instant::now();
        let r = run_experiment(&spec)?;
        cfg.note(format!(
            "{} finished in {:.1} s",
            deployment.as_str(),
            start.elapsed().as_secs_f64()
        ));
        let name = deployment.as_str();
        write_with(&dir.join(format!("drops_{name}.csv")), |f| {
            io::write_drops_csv(&r.drops, f)
        })?;
        write_with(&dir.join(format!("aggregate_{name}.json")), |f| io::write_json(&r, f))?;
        results.push(r);
    }
    let (hex, ga) = (&results[0], &results[1]);
    let rows: Vec<RuntimeRow> = hex
        .cells
        .iter()
        .map(|h| {
            let g = ga
                .cell(h.n_uabs, h.destroy_fraction)
                .context("GA result missing a matrix cell")?;
            Ok(RuntimeRow {
                n_uabs: h.n_uabs,
                destroy_fraction: h.destroy_fraction,
                hex_elapsed_s: h.mean_elapsed_s,
                ga_elapsed_s: g.mean_elapsed_s,
                hex_fifth_pse: h.mean_fifth_pse,
                ga_fifth_pse: g.mean_fifth_pse,
            })
        })
        .collect::<Result<_>>()?;
    let path: PathBuf = dir.join("runtime.csv");
    write_with(&path, |f| io::write_records_csv(&rows, f))?;
    for r in &rows {
        println!(
            "u{} d{}: hex {:.3} s / {:.5}, ga {:.3} s / {:.5}",
            r.n_uabs, r.destroy_fraction, r.hex_elapsed_s, r.hex_fifth_pse, r.ga_elapsed_s, r.ga_fifth_pse
        );
    }
    Ok(())
}
