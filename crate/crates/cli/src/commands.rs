use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use edgeband_core::acceptance;
use edgeband_core::bloch::band_sweep;
use edgeband_core::dirac_point::{certify_dirac_point, DiracPointCertificate};
use edgeband_core::edge::{bifurcation_sweep, find_edge_states, BifurcationDiagram};
use edgeband_core::effective_dirac::{zero_mode, DiracSpec, ZeroMode};
use edgeband_core::multiscale::{compute_e2, solve_corrector};
use edgeband_core::potential::ModulatedPotential;
use serde_json::json;

use crate::config::RunConfig;
use crate::plot::{Plot, Series, Style};

const MAX_PLOT_POINTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Bands,
    DiracPoint,
    ZeroMode,
    E2,
    EdgeState,
    Bifurcation,
    Verify,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
    Numerics(edgeband_core::Error),
    Verify(usize),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Io(_) => 1,
            Failure::Numerics(e) => e.exit_code() as u8,
            Failure::Verify(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
            Failure::Numerics(e) => write!(f, "{e}"),
            Failure::Verify(n) => write!(f, "{n} acceptance criteria failed"),
        }
    }
}

impl From<edgeband_core::Error> for Failure {
    fn from(e: edgeband_core::Error) -> Self {
        Failure::Numerics(e)
    }
}

type Outcome = Result<(), Failure>;

pub struct Run {
    pub config: RunConfig,
    pub out: PathBuf,
    pub plots: bool,
}

impl Run {
    fn write(&self, name: &str, contents: &str) -> Outcome {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    }

    fn write_json(&self, name: &str, value: &serde_json::Value) -> Outcome {
        let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
        text.push('\n');
        self.write(name, &text)
    }

    fn plot(&self, name: &str, plot: Plot) -> Outcome {
        if self.plots {
            self.write(name, &plot.to_svg())?;
        }
        Ok(())
    }

    fn potential(&self) -> Result<ModulatedPotential, Failure> {
        Ok(self.config.potential.build()?)
    }

    fn certificate(&self, n: usize) -> Result<DiracPointCertificate, Failure> {
        let u = self.potential()?;
        let cert = certify_dirac_point(&u.v, n, self.config.m_max, self.config.tolerances.degeneracy)?;
        Ok(cert.with_theta(&u.w)?)
    }

    fn zero_mode(&self, cert: &DiracPointCertificate) -> Result<ZeroMode, Failure> {
        let u = self.potential()?;
        let spec = DiracSpec::new(cert.lambda_sharp, cert.theta()?, u.wall)?;
        let x_max = self.config.zero_mode.x_max.unwrap_or_else(|| spec.default_x_max());
        Ok(zero_mode(&spec, x_max, self.config.zero_mode.intervals)?)
    }
}

fn thin<T: Copy>(points: &[T]) -> Vec<T> {
    let stride = points.len().div_ceil(MAX_PLOT_POINTS).max(1);
    points.iter().step_by(stride).copied().collect()
}

pub fn prepare_output(out: &Path) -> Outcome {
    fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))
}

pub fn run(command: Command, run: &Run) -> Outcome {
    prepare_output(&run.out)?;
    if command != Command::Verify {
        let mut resolved = run.config.clone();
        resolved.output_dir = Some(run.out.display().to_string());
        resolved.plots = run.plots;
        let mut text = resolved.to_json();
        text.push('\n');
        run.write("resolved_config.json", &text)?;
    }
    match command {
        Command::Bands => bands(run),
        Command::DiracPoint => dirac_point(run),
        Command::ZeroMode => zero_mode_cmd(run),
        Command::E2 => e2(run),
        Command::EdgeState => edge_state(run),
        Command::Bifurcation => bifurcation(run),
        Command::Verify => verify(run),
    }
}

fn bands(run: &Run) -> Outcome {
    let u = run.potential()?;
    let q = u.v.plus(&u.w.scaled(u.delta * u.wall.limit_plus()));
    let bands = band_sweep(&q, run.config.k_samples, run.config.m_max, run.config.bands)?;
    run.write("bands.csv", &bands.to_csv())?;
    let mut plot = Plot::new("Floquet-Bloch bands", "k", "E");
    for b in 0..bands.n_bands {
        let pts = bands.k_grid.iter().copied().zip(bands.band(b)).collect();
        plot = plot.with(Series::new(format!("band {}", b + 1), pts, Style::Line));
    }
    run.plot("bands.svg", plot)
}

fn dirac_point(run: &Run) -> Outcome {
    let cert = run.certificate(run.config.n)?;
    run.write_json("dirac_point.json", &cert.to_json())
}

fn zero_mode_cmd(run: &Run) -> Outcome {
    let cert = run.certificate(run.config.n)?;
    let zm = run.zero_mode(&cert)?;
    run.write("zero_mode.csv", &zm.to_csv())?;
    let xs = thin(&zm.x);
    let idx: Vec<usize> = thin(&(0..zm.x.len()).collect::<Vec<_>>());
    let series = |label: &str, f: &dyn Fn(usize) -> f64, style| {
        Series::new(label, xs.iter().zip(&idx).map(|(&x, &i)| (x, f(i))).collect(), style)
    };
    let plot = Plot::new(format!("Dirac zero mode, branch {}", zm.branch), "X", "alpha")
        .with(series("Re alpha1", &|i| zm.alpha1[i].re, Style::Line))
        .with(series("Im alpha1", &|i| zm.alpha1[i].im, Style::Dashed))
        .with(series("Re alpha2", &|i| zm.alpha2[i].re, Style::Dashed))
        .with(series("Im alpha2", &|i| zm.alpha2[i].im, Style::Line));
    run.plot("zero_mode.svg", plot)
}

fn e2(run: &Run) -> Outcome {
    let cert = run.certificate(run.config.n)?;
    let zm = run.zero_mode(&cert)?;
    let u = run.potential()?;
    let corrector = solve_corrector(&cert, &u.w, &zm, run.config.m_max)?;
    let e2 = compute_e2(&cert, &corrector, &zm)?;
    let mut value = e2.to_json();
    let extra = json!({
        "n": cert.n,
        "E_star": cert.e_star,
        "lambda_sharp": cert.lambda_sharp,
        "theta_sharp": cert.theta_sharp,
        "branch": zm.branch.to_string(),
        "quadrature_error_estimate": e2.quadrature_error_estimate,
    });
    if let (Some(obj), Some(more)) = (value.as_object_mut(), extra.as_object()) {
        obj.extend(more.clone());
    }
    run.write_json("e2.json", &value)
}

fn edge_state(run: &Run) -> Outcome {
    let cert = run.certificate(run.config.n)?;
    let u = run.potential()?;
    let search = find_edge_states(&u.v, &u.w, &u.wall, u.delta, &cert, &run.config.edge_options())?;
    let states: Vec<_> = search
        .states
        .iter()
        .map(|s| {
            json!({
                "E_delta": s.e_delta,
                "raw": s.raw,
                "scaled_shift": (s.e_delta - cert.e_star) / (u.delta * u.delta),
                "residual": s.residual,
                "leak": s.leak,
                "h": s.grid.h,
            })
        })
        .collect();
    run.write_json(
        "edge_states.json",
        &json!({
            "delta": search.delta,
            "n": cert.n,
            "E_star": cert.e_star,
            "gap": [search.gap.0, search.gap.1],
            "window": [search.window.0, search.window.1],
            "theta_zero": search.theta_zero,
            "half_length": search.half_length,
            "states": states,
        }),
    )?;
    let mut plot = Plot::new(format!("edge states at delta = {}", u.delta), "x", "psi");
    for (j, s) in search.states.iter().enumerate() {
        run.write(&format!("edge_state_{j}.csv"), &s.to_csv())?;
        let pts: Vec<(f64, f64)> = (0..s.grid.n).map(|i| (s.grid.x(i), s.psi[i])).collect();
        plot = plot.with(Series::new(format!("E = {:.8}", s.e_delta), thin(&pts), Style::Line));
    }
    run.plot("edge_state.svg", plot)
}

fn bifurcation_plot(diagram: &BifurcationDiagram) -> Plot {
    let mut plot = Plot::new("edge state bifurcation", "delta", "E");
    for (p, &e_star) in diagram.e_star.iter().enumerate() {
        let rows: Vec<_> = diagram.branch(p).collect();
        let edge = |f: fn(&(f64, f64)) -> f64| -> Vec<(f64, f64)> {
            std::iter::once((0.0, e_star))
                .chain(rows.iter().filter_map(|r| r.gap.as_ref().map(|g| (r.delta, f(g)))))
                .collect()
        };
        plot = plot.with(Series::new(format!("point {p} gap lower"), edge(|g| g.0), Style::Dashed)).with(Series::new(
            format!("point {p} gap upper"),
            edge(|g| g.1),
            Style::Dashed,
        ));
        let states: Vec<(f64, f64)> = std::iter::once((0.0, e_star))
            .chain(rows.iter().flat_map(|r| r.energies.iter().map(|&e| (r.delta, e))))
            .collect();
        plot = plot.with(Series::new(format!("point {p} edge states"), states, Style::Markers));
    }
    plot
}

fn bifurcation(run: &Run) -> Outcome {
    let u = run.potential()?;
    let certs = run.config.points.iter().map(|&n| run.certificate(n)).collect::<Result<Vec<_>, _>>()?;
    let mut deltas = run.config.delta_list.clone();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let diagram = bifurcation_sweep(&u.v, &u.w, &u.wall, &deltas, &certs, &run.config.edge_options())?;
    run.write("bifurcation.csv", &diagram.to_csv())?;
    for r in diagram.rows.iter().filter(|r| r.note.is_some() || r.theta_zero) {
        let mut msg = format!("delta = {}, point {}:", r.delta, r.point_index);
        if r.theta_zero {
            msg.push_str(" theta_sharp = 0, no first-order prediction;");
        }
        if let Some(note) = &r.note {
            msg.push_str(&format!(" {note}"));
        }
        eprintln!("{msg}");
    }
    run.plot("bifurcation.svg", bifurcation_plot(&diagram))
}

fn verify(run: &Run) -> Outcome {
    let mut reports = Vec::new();
    for id in 1..=acceptance::CRITERIA.len() {
        let r = acceptance::run_criterion(id).expect("criterion id in range");
        println!("{r}");
        reports.push(r);
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    run.write_json("verify_report.json", &serde_json::to_value(&reports).expect("reports serialize"))?;
    if failed > 0 {
        return Err(Failure::Verify(failed));
    }
    println!("all {} criteria passed", reports.len());
    Ok(())
}
