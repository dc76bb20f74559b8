use crate::config::{load_data, resolve, ExperimentConfig, FemModel, PathConfig, Reference};
use crate::with_reference;
use anyhow::{anyhow, bail, Context, Result};
use plastokit::data::UniaxialDataset;
use plastokit::path::LoadingPath;
use plastokit::reference::{fit_phenomenological, mean_trace, simulate_uniaxial, FitConfig};
use plastokit::return_map::{Constitutive, SurrogateModel};
use plastokit::trainer::{ablate_constraints, evaluate_extrapolation, internal_extent, path_targets, train, TrainRecord};
use plastokit_fem::{run_benchmark, write_convergence_csv, write_curve_csv, write_field_csv};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Generate,
    Train,
    Evaluate,
    Ablate,
    FitPhenom,
    Fem,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

/// Files written by a run, relative to its output directory.
#[derive(Debug, Default)]
pub struct Outcome {
    pub out: PathBuf,
    pub files: Vec<String>,
}

impl Outcome {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let p = self.out.join(name);
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir)?;
        }
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?))
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, v)?;
        writeln!(w)?;
        Ok(())
    }
}

/// Load the configuration file and run `cmd`.
pub fn run_file(cmd: Command, config: &Path, opts: &RunOptions) -> Result<Outcome> {
    let cfg = ExperimentConfig::load(config)?;
    let base = config.parent().unwrap_or(Path::new(".")).to_path_buf();
    run(cmd, &cfg, &base, opts)
}

/// Run `cmd`; relative paths in `cfg` are resolved against `base`.
pub fn run(cmd: Command, cfg: &ExperimentConfig, base: &Path, opts: &RunOptions) -> Result<Outcome> {
    let start = Instant::now();
    let seed = opts.seed.unwrap_or(cfg.seed);
    let out = match (&opts.out, &cfg.out) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => resolve(base, o),
        (None, None) => PathBuf::from("out"),
    };
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut oc = Outcome { out, files: Vec::new() };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs.max(1)).build()?;
    let reference = cfg.material.build()?;
    let ctx = Ctx { cfg, base, seed, reference: &reference };
    match cmd {
        Command::Generate => generate(&ctx, &mut oc)?,
        Command::Train => pool.install(|| train_cmd(&ctx, &mut oc))?,
        Command::Evaluate => evaluate(&ctx, &mut oc)?,
        Command::Ablate => ablate(&ctx, &mut oc)?,
        Command::FitPhenom => pool.install(|| fit_phenom(&ctx, &mut oc))?,
        Command::Fem => fem(&ctx, &mut oc)?,
    }
    let manifest = json!({
        "command": cmd,
        "seed": seed,
        "jobs": opts.jobs.max(1),
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "config": cfg,
        "assumptions": assumptions(cmd),
        "outputs": oc.files,
    });
    let files = oc.files.clone();
    oc.json("manifest.json", &manifest)?;
    oc.files = files;
    Ok(oc)
}

fn assumptions(cmd: Command) -> Vec<&'static str> {
    let mut a = vec!["increments per loading branch are a chosen default (path.increments), not a published value"];
    match cmd {
        Command::Fem => a.push("benchmark geometry, mesh and punch patch are chosen defaults"),
        Command::Train | Command::Ablate | Command::Evaluate => {
            a.push("loss is the sum of squared axial stress errors; traces are also reported divided by the iteration-0 loss")
        }
        Command::FitPhenom => a.push("phenomenological starting points are drawn uniformly within the parameter bounds"),
        Command::Generate => a.push("ascending-amplitude programs approximate a graphical protocol"),
    }
    a
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    base: &'a Path,
    seed: u64,
    reference: &'a Reference,
}

impl Ctx<'_> {
    fn data(&self) -> Result<UniaxialDataset> {
        load_data(self.cfg, self.base, self.reference, self.seed)
    }

    fn train_path(&self, data: &UniaxialDataset) -> Result<LoadingPath> {
        self.cfg.path.build(Some(data))
    }

    fn test_path(&self) -> Result<LoadingPath> {
        let pc: PathConfig = match &self.cfg.test_path {
            Some(p) => p.clone(),
            None => self.cfg.path.continuation().ok_or_else(|| anyhow!("no [test_path] given and none can be derived from [path]"))?,
        };
        pc.build(None)
    }
}

fn generate(ctx: &Ctx, oc: &mut Outcome) -> Result<()> {
    let d = ctx.data()?;
    d.write_csv(oc.create("dataset.csv")?)?;
    Ok(())
}

fn write_fit<M: Constitutive>(w: impl Write, m: &M, path: &LoadingPath, data: &UniaxialDataset) -> Result<()> {
    let targets = path_targets(path, data)?;
    let sim = simulate_uniaxial(path, m)?;
    let mut w = BufWriter::new(w);
    writeln!(w, "step,eps11,sig11_data,sig11_model")?;
    writeln!(w, "0,0.0,0.0,{:?}", sim.sig[0])?;
    for (i, (e, t)) in path.targets().iter().zip(&targets).enumerate() {
        writeln!(w, "{},{e:?},{t:?},{:?}", i + 1, sim.sig[i + 1])?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary {
    seed: u64,
    iterations: usize,
    best_iter: usize,
    best_loss: f64,
    relative_loss: f64,
    c: f64,
    failed_iterations: Vec<usize>,
}

fn summary(seed: u64, rec: &TrainRecord, c: f64) -> TrainSummary {
    TrainSummary {
        seed,
        iterations: rec.loss.len().saturating_sub(1),
        best_iter: rec.best_iter,
        best_loss: rec.best_loss,
        relative_loss: rec.best_loss / rec.loss[0],
        c,
        failed_iterations: rec.failures.clone(),
    }
}

fn train_cmd(ctx: &Ctx, oc: &mut Outcome) -> Result<()> {
    let data = ctx.data()?;
    let path = ctx.train_path(&data)?;
    let t = &ctx.cfg.train;
    let seeds: Vec<u64> = (0..t.runs.max(1) as u64).map(|i| ctx.seed + i).collect();
    let runs: Vec<Result<(SurrogateModel, TrainRecord)>> = seeds
        .par_iter()
        .map(|&s| {
            let m = ctx.cfg.surrogate.build(ctx.reference, s);
            Ok(train(&m, &path, &data, &t.config(s)).with_context(|| format!("training with seed {s}"))?)
        })
        .collect();
    for (s, r) in seeds.iter().zip(runs) {
        let (model, rec) = r?;
        let dir = if seeds.len() == 1 { String::new() } else { format!("seed_{s}/") };
        rec.write_csv(oc.create(&format!("{dir}train_record.csv"))?)?;
        oc.json(&format!("{dir}model.json"), &model.to_json())?;
        write_fit(oc.create(&format!("{dir}fit.csv"))?, &model, &path, &data)?;
        oc.json(&format!("{dir}summary.json"), &summary(*s, &rec, model.c))?;
    }
    Ok(())
}

fn evaluate(ctx: &Ctx, oc: &mut Outcome) -> Result<()> {
    let file = match &ctx.cfg.evaluate.model {
        Some(p) => resolve(ctx.base, p),
        None => oc.out.join("model.json"),
    };
    let model = load_model(&file)?;
    let train_path = ctx.cfg.path.build(None)?;
    let test_path = ctx.test_path()?;
    let report = with_reference!(ctx.reference, r => evaluate_extrapolation(&model, &train_path, &test_path, r))?;
    let a = simulate_uniaxial(&test_path, &model)?;
    let b = with_reference!(ctx.reference, r => simulate_uniaxial(&test_path, r))?;
    let n_train = train_path.n_increments();
    let mut w = oc.create("predictions.csv")?;
    writeln!(w, "step,eps11,sig11_model,sig11_reference,extrapolation")?;
    for i in 0..a.len() {
        writeln!(w, "{i},{:?},{:?},{:?},{}", a.eps[i], a.sig[i], b.sig[i], u8::from(i > n_train))?;
    }
    drop(w);
    oc.json("errors.json", &report)?;
    Ok(())
}

pub fn load_model(file: &Path) -> Result<SurrogateModel> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
    Ok(SurrogateModel::from_json(&v)?)
}

fn ablate(ctx: &Ctx, oc: &mut Outcome) -> Result<()> {
    let data = ctx.data()?;
    let path = ctx.train_path(&data)?;
    let test_path = ctx.test_path()?;
    let base = ctx.cfg.surrogate.build(ctx.reference, ctx.seed);
    let cfg = ctx.cfg.train.config(ctx.seed);
    let (report, recs) = with_reference!(ctx.reference, r => ablate_constraints(&base, &path, &test_path, &data, r, &cfg))?;
    oc.json("ablation.json", &report)?;
    rec_csv(oc, "constrained/train_record.csv", &recs[0])?;
    rec_csv(oc, "unconstrained/train_record.csv", &recs[1])?;

    let mut models = [base.clone(), base.clone()];
    models[1].iso.net = models[1].iso.net.clone().unconstrained();
    models[1].kin.net = models[1].kin.net.clone().unconstrained();
    for (m, r) in models.iter_mut().zip(&recs) {
        m.set_params(&r.best_params);
    }
    let (r_seen, x_seen) = with_reference!(ctx.reference, r => internal_extent(r, &path))?;
    let samples = 200;
    let mut w = oc.create("hardening.csv")?;
    writeln!(w, "r,R_constrained,R_unconstrained,xx,phi_constrained,phi_unconstrained,seen")?;
    for i in 0..=samples {
        let t = 5.0 * i as f64 / samples as f64;
        let (r, y) = (t * r_seen, t * x_seen);
        let [c, u] = &models;
        writeln!(
            w,
            "{r:?},{:?},{:?},{y:?},{:?},{:?},{}",
            c.iso.r_of_r(r),
            u.iso.r_of_r(r),
            c.kin.phi(y),
            u.kin.phi(y),
            u8::from(t <= 1.0)
        )?;
    }
    Ok(())
}

fn rec_csv(oc: &mut Outcome, name: &str, rec: &TrainRecord) -> Result<()> {
    rec.write_csv(oc.create(name)?)?;
    Ok(())
}

fn fit_phenom(ctx: &Ctx, oc: &mut Outcome) -> Result<()> {
    let Reference::Single(truth) = ctx.reference else {
        bail!("fit-phenom compares against the single-backstress model; set material.kind = \"single-nlk\"");
    };
    let data = ctx.data()?;
    let path = ctx.train_path(&data)?;
    let f = &ctx.cfg.fit;
    let fit_cfg = FitConfig { iterations: f.iterations, lr: f.lr, base: truth.p, ..Default::default() };
    let seeds: Vec<u64> = (0..f.runs.max(1) as u64).map(|i| ctx.seed + i).collect();
    let fits: Vec<Result<_>> = seeds
        .par_iter()
        .map(|&s| Ok(fit_phenomenological(&data, &path, &fit_cfg, s).with_context(|| format!("parameter fit with seed {s}"))?))
        .collect();
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;
    let train_cfg = |s| plastokit::trainer::TrainConfig { iterations: f.iterations, ..ctx.cfg.train.config(s) };
    let nets: Vec<Result<_>> = seeds
        .par_iter()
        .map(|&s| {
            let m = ctx.cfg.surrogate.build(ctx.reference, s);
            Ok(train(&m, &path, &data, &train_cfg(s)).with_context(|| format!("training with seed {s}"))?.1)
        })
        .collect();
    let nets = nets.into_iter().collect::<Result<Vec<_>>>()?;

    let norm = |t: &[f64]| -> Vec<f64> { t.iter().map(|v| v / t[0]).collect() };
    let pf: Vec<Vec<f64>> = fits.iter().map(|r| r.loss.clone()).collect();
    let sf: Vec<Vec<f64>> = nets.iter().map(|r| r.loss.clone()).collect();
    let traces = [
        mean_trace(&pf),
        mean_trace(&sf),
        mean_trace(&pf.iter().map(|t| norm(t)).collect::<Vec<_>>()),
        mean_trace(&sf.iter().map(|t| norm(t)).collect::<Vec<_>>()),
    ];
    let mut w = oc.create("loss_traces.csv")?;
    writeln!(w, "iter,phenomenological,surrogate,phenomenological_normalized,surrogate_normalized")?;
    for i in 0..traces[0].len().min(traces[1].len()) {
        writeln!(w, "{i},{:?},{:?},{:?},{:?}", traces[0][i], traces[1][i], traces[2][i], traces[3][i])?;
    }
    drop(w);
    let runs: Vec<_> = seeds
        .iter()
        .zip(fits.iter().zip(&nets))
        .map(|(s, (fit, net))| {
            json!({
                "seed": s,
                "fitted": fit.params.fitted(),
                "fit_final_loss": fit.loss.last(),
                "surrogate_best_loss": net.best_loss,
                "surrogate_c": net.c.get(net.best_iter),
            })
        })
        .collect();
    oc.json("fits.json", &json!({ "parameters": ["C", "gamma", "m", "H1", "H2", "H3"], "runs": runs }))?;
    Ok(())
}

fn fem(ctx: &Ctx, oc: &mut Outcome) -> Result<()> {
    let s = &ctx.cfg.fem;
    let cfg = s.config();
    let res = match s.model {
        FemModel::Reference => with_reference!(ctx.reference, r => run_benchmark(&cfg, r))?,
        FemModel::Surrogate => {
            let m = match &s.surrogate {
                Some(p) => load_model(&resolve(ctx.base, p))?,
                None => ctx.cfg.surrogate.build(ctx.reference, ctx.seed),
            };
            run_benchmark(&cfg, &m)?
        }
    };
    write_convergence_csv(oc.create("convergence.csv")?, &res.log)?;
    write_curve_csv(oc.create("probe.csv")?, &res.probe)?;
    write_curve_csv(oc.create("average.csv")?, res.cook_summary())?;
    write_field_csv(oc.create("field.csv")?, &res.mesh, &res.displacement)?;
    oc.json(
        "summary.json",
        &json!({
            "benchmark": cfg.benchmark,
            "iterations": res.log.iterations(),
            "min_dissipation": res.min_dissipation,
            "total_dissipation": res.total_dissipation,
        }),
    )?;
    Ok(())
}
