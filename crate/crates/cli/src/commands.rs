use std::path::Path;

use quasih_core::C64;
use quasih_core::analytics::{
    averaged_state, classify_w, concurrence, concurrence_closed_form, disentangling_w, disentanglement_times,
    wootters_concurrence, AnalyticsError, EntanglementClass, Side, WClass,
};
use quasih_core::dynamics::Trajectory;
use quasih_core::dyson::{run_demo, DemoChoice, DemoReport};
use quasih_core::model::{ModelParams, Unitary2};
use quasih_core::tol::{TAU_FD, TAU_ODE};
use quasih_core::verify::{self, Suite};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Scenario, ScenarioConfig};
use crate::output::{self, CurveMeta, CurveRecord, Unit};
use crate::CliError;

pub struct CurveOptions<'a> {
    pub out: Option<&'a Path>,
    pub format: Option<Format>,
    pub unit: Unit,
}

fn destination<'a>(opts: &CurveOptions<'a>, cfg: &'a ScenarioConfig) -> (Option<&'a Path>, Format) {
    let path = opts.out.or(cfg.output_path());
    let format = opts.format.or(cfg.output_format()).unwrap_or_else(|| {
        match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    });
    (path, format)
}

pub fn evolve(s: &Scenario, opts: &CurveOptions) -> Result<(), CliError> {
    let rows = output::curve(s, opts.unit)?;
    let (path, format) = destination(opts, &s.config);
    let meta = CurveMeta {
        command: "evolve",
        config: &s.config,
        omega: s.trajectory.omega(),
        t_max: s.t_max,
        samples: s.samples,
        entropy_unit: opts.unit,
    };
    output::emit(path, &output::render(format, meta, &rows, false))
}

/// Each block is validated up front, computed in parallel, and written in
/// the declared order.
pub fn sweep(s: &Scenario, opts: &CurveOptions) -> Result<(), CliError> {
    let sw = s.config.sweep.as_ref().ok_or_else(|| CliError::Config("sweep: section missing".into()))?;
    let blocks = sw
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut block = s.config.with_sweep_value(sw.param, v).validate().map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("sweep.values[{i}] = {v}: {msg}")),
                other => other,
            })?;
            // The grid is fixed by the base scenario so that blocks line up.
            block.t_max = s.t_max;
            block.samples = s.samples;
            Ok(block)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let pool = thread_pool()?;
    let computed: Vec<Result<Vec<CurveRecord>, CliError>> =
        pool.install(|| blocks.par_iter().map(|b| output::curve(b, opts.unit)).collect());
    let mut rows = Vec::with_capacity(blocks.len() * (s.samples + 1));
    for (block, &v) in computed.into_iter().zip(&sw.values) {
        rows.extend(block?.into_iter().map(|mut r| {
            r.sweep_param = Some(sw.param.name());
            r.sweep_value = Some(v);
            r
        }));
    }
    let (path, format) = destination(opts, &s.config);
    let meta = CurveMeta {
        command: "sweep",
        config: &s.config,
        omega: s.trajectory.omega(),
        t_max: s.t_max,
        samples: s.samples,
        entropy_unit: opts.unit,
    };
    output::emit(path, &output::render(format, meta, &rows, true))
}

/// `QUASIH_THREADS` caps the pool; otherwise rayon's default.
fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("QUASIH_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("QUASIH_THREADS: expected a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

#[derive(Serialize)]
struct Complex {
    re: f64,
    im: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct SideReport {
    classification: &'static str,
    disentanglement_times: Vec<f64>,
    /// Gap between the eigenvalues of the averaged reduced state.
    concurrence: f64,
    /// Wootters concurrence of the averaged state in its two-qubit embedding.
    wootters_concurrence: f64,
    q0: f64,
    z: Complex,
}

#[derive(Serialize)]
struct EntanglementReport<'a> {
    config: &'a ScenarioConfig,
    omega: f64,
    horizon: f64,
    w_class: &'static str,
    concurrence_closed_form: f64,
    non_hermitian: SideReport,
    hermitian: SideReport,
    /// A `W` that makes the initial state a product state, if one is needed.
    disentangling_w: Option<[Complex; 4]>,
}

fn class_name(c: EntanglementClass) -> &'static str {
    match c {
        EntanglementClass::AlwaysEntangled => "always_entangled",
        EntanglementClass::PeriodicTouch => "periodic_touch",
        EntanglementClass::AlwaysProduct => "always_product",
    }
}

fn side_report(traj: &Trajectory, side: Side, horizon: f64) -> SideReport {
    let d = disentanglement_times(traj, side, horizon);
    let avg = averaged_state(traj);
    SideReport {
        classification: class_name(d.class),
        disentanglement_times: d.times,
        concurrence: concurrence(&avg),
        wootters_concurrence: wootters_concurrence(&avg.embed()),
        q0: avg.q0,
        z: avg.z.into(),
    }
}

/// The non-Hermitian side is reported through `W = 1`, i.e. `√η ψ` itself.
pub fn entanglement(s: &Scenario, out: Option<&Path>) -> Result<(), CliError> {
    let traj = &s.trajectory;
    let horizon = s.t_max;
    let w_class = match classify_w(traj.w()).variant {
        WClass::EqualStates => "equal_states",
        WClass::EqualEntropies => "equal_entropies",
        WClass::Generic => "generic",
    };
    let disentangling = match disentangling_w(traj) {
        Ok(w) => Some([w.a.into(), w.b.into(), w.c.into(), w.d.into()]),
        Err(AnalyticsError::AlreadyProduct) => None,
        Err(e) => return Err(CliError::Numeric(format!("disentangling W: {e}"))),
    };
    let report = EntanglementReport {
        config: &s.config,
        omega: traj.omega(),
        horizon,
        w_class,
        concurrence_closed_form: concurrence_closed_form(traj),
        non_hermitian: side_report(&traj.with_unitary(Unitary2::identity()), Side::NonHermitian, horizon),
        hermitian: side_report(traj, Side::Hermitian, horizon),
        disentangling_w: disentangling,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    output::emit(out.or(s.config.output_path()), &text)
}

pub fn verify(suite: Suite, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let report = verify::run(suite, seed);
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    output::emit(out, &text)?;
    if report.all_passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failed invariants: {}", report.failures.join(", "))))
    }
}

#[derive(Serialize)]
struct DemoOutput {
    #[serde(flatten)]
    report: DemoReport,
    tolerance: f64,
    passed: bool,
}

pub fn dyson_demo(choice: DemoChoice, params: &ModelParams, t_end: f64, samples: usize, out: Option<&Path>) -> Result<(), CliError> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(CliError::Config(format!("--t-end: must be positive and finite, got {t_end}")));
    }
    if samples == 0 {
        return Err(CliError::Config("--samples: must be at least 1".into()));
    }
    let report = run_demo(choice, params, t_end, samples).map_err(|e| CliError::Numeric(e.to_string()))?;
    let tolerance = match choice {
        DemoChoice::HZero | DemoChoice::ConstantA => TAU_FD,
        DemoChoice::TimeDepA => 10.0 * TAU_ODE,
    };
    let passed = report.max_deviation <= tolerance;
    let mut text = serde_json::to_string_pretty(&DemoOutput { report, tolerance, passed }).expect("report serializes");
    text.push('\n');
    output::emit(out, &text)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("h(t) deviation {:.3e} exceeds {tolerance:.1e}", report.max_deviation)))
    }
}
