use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use ctarget::control::verify_constraints;
use ctarget::heteroclinic::{find_orbits, select_optimal, verify_orbit, ControlOrbit};
use ctarget::quantum::{
    build_gaussian, propagate, sweep_dimension, Propagation, PropagationPlan, QuantumState,
    TorusQuantization, WavePacketSpec,
};
use ctarget::torus::{lyapunov_estimate, KickedRotorParams, TorusAction};
use ctarget::wigner::export::{
    render_svg, write_config_header, write_contours_csv, write_density_csv, write_state_csv, Panel,
};
use ctarget::wigner::{extract_contours, trace_densities, ContourLevel, ContourSet, PhaseSpaceDensity, Resolution};
use ctarget::ControlScheme;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Command failure with its exit code class.
#[derive(Debug)]
pub enum Failure {
    /// Invalid or inconsistent configuration (exit 2).
    Config(anyhow::Error),
    /// Non-convergence or a numerical check failing (exit 3).
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Numerical(e) => e,
        }
    }
}

impl From<ctarget::Error> for Failure {
    fn from(e: ctarget::Error) -> Self {
        use ctarget::Error as E;
        match e {
            E::NotSymplectic { .. } | E::SingularBlock { .. } | E::EmptyOrbitList => {
                Failure::Numerical(e.into())
            }
            _ => Failure::Config(e.into()),
        }
    }
}

/// Output-side failures are reported as configuration problems (bad paths).
fn io<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Config)
}

const UNIT_TOLERANCE: f64 = 1e-9;
const DESIGNED: [ControlScheme; 4] = [
    ControlScheme::SolA,
    ControlScheme::SolAImproved,
    ControlScheme::SolB,
    ControlScheme::SolBImproved,
];

pub struct RunContext {
    pub config: RunConfig,
    pub out: PathBuf,
}

impl RunContext {
    pub fn new(mut config: RunConfig, out: Option<PathBuf>, orbit: Option<PathBuf>) -> Result<Self, Failure> {
        if let Some(out) = out {
            config.output_dir = out;
        }
        if orbit.is_some() {
            config.orbit = orbit;
        }
        let out = config.output_dir.clone();
        io(std::fs::create_dir_all(&out)
            .with_context(|| format!("creating output directory {}", out.display())))?;
        Ok(Self { config, out })
    }

    fn params(&self) -> Result<KickedRotorParams, Failure> {
        Ok(KickedRotorParams::new(self.config.k, TorusAction::Doubled)?)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Config(e.into()))?;
        text.push('\n');
        let path = self.path(name);
        io(std::fs::write(&path, text).with_context(|| format!("writing {}", path.display())))
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, Failure> {
        let path = self.path(name);
        let file = io(File::create(&path).with_context(|| format!("creating {}", path.display())))?;
        let mut out = BufWriter::new(file);
        io(write_config_header(&mut out, &self.config).map_err(Into::into))?;
        Ok(out)
    }

    /// The orbit from `--orbit` or the config, or else the optimal search result.
    fn orbit(&self) -> Result<ControlOrbit, Failure> {
        match &self.config.orbit {
            Some(path) => {
                let orbit = ControlOrbit::load(path).map_err(|e| {
                    Failure::Config(anyhow!("loading orbit {}: {e}", path.display()))
                })?;
                if orbit.tau != self.config.tau || (orbit.k - self.config.k).abs() > 1e-12 {
                    return Err(Failure::Config(anyhow!(
                        "orbit file has K = {}, tau = {} but the config has K = {}, tau = {}",
                        orbit.k,
                        orbit.tau,
                        self.config.k,
                        self.config.tau
                    )));
                }
                Ok(orbit)
            }
            None => Ok(self.search()?.0),
        }
    }

    fn search(&self) -> Result<(ControlOrbit, usize, Value), Failure> {
        let outcome = find_orbits(&self.config.search_config(), &self.params()?)?;
        let diagnostics = serde_json::to_value(&outcome.diagnostics).unwrap_or(Value::Null);
        if outcome.is_empty() {
            let notes = outcome.diagnostics.notes.join("; ");
            return Err(Failure::Numerical(anyhow!(
                "no orbit found for K = {}, tau = {}{}",
                self.config.k,
                self.config.tau,
                if notes.is_empty() { String::new() } else { format!(" ({notes})") }
            )));
        }
        let best = select_optimal(&outcome.orbits)?;
        Ok((best, outcome.orbits.len(), diagnostics))
    }
}

pub fn cmd_orbit(ctx: &RunContext) -> Result<(), Failure> {
    let params = ctx.params()?;
    let (best, candidates, diagnostics) = ctx.search()?;
    let report = verify_orbit(&best, &params);
    let mut constraints = serde_json::Map::new();
    for scheme in DESIGNED {
        let dev = verify_constraints(&best, scheme)?.max_deviation();
        constraints.insert(scheme.name().into(), json!(dev));
    }
    let lyapunov = lyapunov_estimate(&params, 10_000, 10, ctx.config.seed)?;

    let mut file = serde_json::to_value(best.to_file()).map_err(|e| Failure::Config(e.into()))?;
    file["config"] = serde_json::to_value(&ctx.config).map_err(|e| Failure::Config(e.into()))?;
    ctx.write_json("orbit.json", &file)?;
    ctx.write_json(
        "orbit_report.json",
        &json!({
            "config": ctx.config,
            "candidates": candidates,
            "diagnostics": diagnostics,
            "verification": report,
            "shift_sum": best.shift_sum(),
            "constraint_max_deviation": constraints,
            "lyapunov_exponent": lyapunov,
        }),
    )?;
    println!(
        "orbit: {candidates} candidates, shift_in {:.6e}, shift_out {:.6e}, max residual {:.2e}",
        best.shift_in, best.shift_out, report.max_residual
    );
    Ok(())
}

struct Run {
    tq: TorusQuantization,
    orbit: ControlOrbit,
    propagation: Propagation,
}

fn run_propagation(ctx: &RunContext) -> Result<Run, Failure> {
    let orbit = ctx.orbit()?;
    let c = &ctx.config;
    let tq = TorusQuantization::doubled(c.n)?;
    let initial = build_gaussian(WavePacketSpec::new(c.alpha[0], c.alpha[1]), &tq)?;
    let target = build_gaussian(WavePacketSpec::new(c.beta[0], c.beta[1]), &tq)?;
    let plan = PropagationPlan {
        unwind_period: c.unwind_period,
        ..PropagationPlan::along(orbit.clone(), c.scheme)
    };
    let propagation = propagate(&plan, &tq, &initial, &target)?;
    let norm_error = (propagation.final_state.norm_sqr() - 1.0).abs();
    if !(norm_error <= UNIT_TOLERANCE) {
        return Err(Failure::Numerical(anyhow!(
            "unitarity violated: final norm deviates by {norm_error:e}"
        )));
    }
    Ok(Run { tq, orbit, propagation })
}

#[derive(Serialize)]
struct ContourSummary {
    t: usize,
    level: &'static str,
    polylines: usize,
    closed: bool,
    area: f64,
    area_over_h: f64,
    circularity: f64,
}

struct WignerFrames {
    densities: Vec<PhaseSpaceDensity>,
    contours: Vec<Vec<ContourSet>>,
    summary: Vec<ContourSummary>,
}

fn wigner_frames(ctx: &RunContext, run: &Run) -> Result<WignerFrames, Failure> {
    let resolution = Resolution::oversampled(run.tq.n(), ctx.config.wigner.oversample);
    let centers = run.orbit.full_unwrapped();
    let densities = trace_densities(
        &run.propagation.trace,
        &centers[..run.propagation.trace.len()],
        &run.tq,
        resolution,
    )?;
    let h = run.tq.planck_cell();
    let mut contours = Vec::new();
    let mut summary = Vec::new();
    for (t, w) in densities.iter().enumerate() {
        let sets: Vec<ContourSet> = ContourLevel::BOTH.iter().map(|&l| extract_contours(w, l)).collect();
        for set in &sets {
            summary.push(ContourSummary {
                t,
                level: set.level.tag(),
                polylines: set.polylines.len(),
                closed: !set.is_fragmented(),
                area: set.area(),
                area_over_h: set.area() / h,
                circularity: set.circularity(),
            });
        }
        contours.push(sets);
    }
    Ok(WignerFrames { densities, contours, summary })
}

fn write_states(ctx: &RunContext, run: &Run) -> Result<(), Failure> {
    for (t, state) in run.propagation.trace.iter().enumerate() {
        write_state(ctx, &format!("state_t{t}.csv"), state, &run.tq)?;
    }
    write_state(ctx, "state_final.csv", &run.propagation.final_state, &run.tq)
}

fn write_state(ctx: &RunContext, name: &str, state: &QuantumState, tq: &TorusQuantization) -> Result<(), Failure> {
    let mut out = ctx.create(name)?;
    io(write_state_csv(&mut out, state, tq).and_then(|_| out.flush()).map_err(Into::into))
}

fn write_contours(ctx: &RunContext, frames: &WignerFrames) -> Result<(), Failure> {
    let labelled: Vec<(usize, ContourSet)> = frames
        .contours
        .iter()
        .enumerate()
        .flat_map(|(t, sets)| sets.iter().cloned().map(move |s| (t, s)))
        .collect();
    let mut out = ctx.create("contours.csv")?;
    io(write_contours_csv(&mut out, &labelled).and_then(|_| out.flush()).map_err(Into::into))?;

    let panels: Vec<Panel<'_>> = frames
        .densities
        .iter()
        .zip(&frames.contours)
        .enumerate()
        .map(|(t, (density, contours))| Panel {
            label: format!("t = {t}"),
            density,
            contours,
        })
        .collect();
    let config = serde_json::to_string(&ctx.config).map_err(|e| Failure::Config(e.into()))?;
    let svg = render_svg(&panels).replacen(
        "\n",
        &format!("\n<!-- config: {} -->\n", config.replace("--", "- -")),
        1,
    );
    let path = ctx.path("contours.svg");
    io(std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display())))
}

pub fn cmd_propagate(ctx: &RunContext) -> Result<(), Failure> {
    let run = run_propagation(ctx)?;
    write_states(ctx, &run)?;
    let frames = wigner_frames(ctx, &run)?;
    write_contours(ctx, &frames)?;
    ctx.write_json(
        "summary.json",
        &json!({
            "config": ctx.config,
            "scheme": ctx.config.scheme,
            "N": run.tq.n(),
            "h": run.tq.planck_cell(),
            "steps": run.orbit.tau,
            "delta": run.propagation.delta,
            "final_norm": run.propagation.final_state.norm_sqr(),
            "shift_in": run.orbit.shift_in,
            "shift_out": run.orbit.shift_out,
            "contours": frames.summary,
        }),
    )?;
    println!(
        "propagate: {} at N = {}, delta = {:.6e}",
        ctx.config.scheme,
        run.tq.n(),
        run.propagation.delta
    );
    Ok(())
}

pub fn cmd_wigner(ctx: &RunContext) -> Result<(), Failure> {
    let run = run_propagation(ctx)?;
    let frames = wigner_frames(ctx, &run)?;
    for (t, density) in frames.densities.iter().enumerate() {
        let mut out = ctx.create(&format!("density_t{t}.csv"))?;
        io(write_density_csv(&mut out, density).and_then(|_| out.flush()).map_err(Into::into))?;
    }
    write_contours(ctx, &frames)?;
    ctx.write_json(
        "wigner.json",
        &json!({
            "config": ctx.config,
            "N": run.tq.n(),
            "h": run.tq.planck_cell(),
            "delta": run.propagation.delta,
            "totals": frames.densities.iter().map(PhaseSpaceDensity::total).collect::<Vec<_>>(),
            "contours": frames.summary,
        }),
    )?;
    println!("wigner: {} frames at N = {}", frames.densities.len(), run.tq.n());
    Ok(())
}

pub fn cmd_sweep(ctx: &RunContext) -> Result<(), Failure> {
    let orbit = ctx.orbit()?;
    let c = &ctx.config;
    let rows = sweep_dimension(&c.n_list, &c.schemes, &orbit, c.unwind_period)?;
    let mut out = ctx.create("sweep.csv")?;
    let mut body = String::from("N,h,scheme,delta,status\n");
    for r in &rows {
        let delta = r.delta.map(|d| format!("{d:.12e}")).unwrap_or_default();
        body.push_str(&format!(
            "{},{:.12e},{},{delta},{}\n",
            r.n,
            r.h,
            r.scheme,
            csv_field(&r.status)
        ));
    }
    io(out.write_all(body.as_bytes()).and_then(|_| out.flush()).map_err(Into::into))?;
    let failed = rows.iter().filter(|r| r.delta.is_none()).count();
    println!("sweep: {} rows, {failed} failed", rows.len());
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn output_dir(ctx: &RunContext) -> &Path {
    &ctx.out
}
