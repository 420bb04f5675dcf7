use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use quadtrap::analytic::{
    radial_minimum, radial_turning_points, solve_cn_orbit, v_r, z_axis_solution, AnalyticError,
    CnOrbit,
};
use quadtrap::config::{ConfigError, ParamSource, RunConfig};
use quadtrap::constants::{MoleculeTable, PhysicalConstants, TABLE_ORDER};
use quadtrap::dynamics::{
    export, integrate, published_orbit, CartesianState, Chart, DenseStore, DynamicsError,
    PhaseState, Sample, Trajectory, PUBLISHED_ORBITS,
};
use quadtrap::integrability::{
    morales_ramis_verdict, parse_rational, verify_darboux_v1, Rational, Verdict,
};
use quadtrap::poincare::{
    compute_section, default_seeds, seed_from_energy, SectionSpec, Seed, SeedSection,
};
use quadtrap::potential::{DeltaSource, PotentialParams, VibronicConstants};
use quadtrap::svg::{palette, render, Panel, Series, Style};
use quadtrap::zeeman::{trap_depth_report, RotorState, TrapSpec};

#[derive(Parser)]
#[command(
    name = "quadtrap",
    version,
    about = "Centre-of-mass dynamics of a spin-1 diatomic molecule in a quadrupole trap"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Output file for the main result (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG plot here.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Worker threads for section scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Relative integrator tolerance.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Absolute integrator tolerance.
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Which published delta to use: text, caption or computed.
    #[arg(long, global = true, value_parser = ["text", "caption", "computed"])]
    delta_source: Option<String>,
    /// Molecule preset (H2, N2, O2, F2, Cl2, Br2, I2).
    #[arg(long, global = true, conflicts_with_all = ["sigma", "delta"])]
    molecule: Option<String>,
    /// Rotational quantum number J.
    #[arg(long = "j", global = true, default_value_t = 10)]
    j: u32,
    /// Magnetic quantum number M.
    #[arg(long = "m", global = true, default_value_t = -10, allow_negative_numbers = true)]
    m: i32,
    /// Spin weight |a|^2 - |c|^2.
    #[arg(
        long,
        global = true,
        default_value_t = 0.5,
        allow_negative_numbers = true
    )]
    varpi: f64,
    /// Field gradient times chamber size, in tesla.
    #[arg(long, global = true, default_value_t = 5.0)]
    b1d: f64,
    /// Raw sigma; needs --delta.
    #[arg(long, global = true, requires = "delta")]
    sigma: Option<f64>,
    /// Raw delta; needs --sigma.
    #[arg(long, global = true, requires = "sigma")]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Polarisability coefficients and trap depths of the molecule presets.
    DepthTable,
    /// Integrate one trajectory and write it as CSV.
    Orbit {
        /// Published initial condition: P1, P2, P3, Q1, Q2, Q3 or CH.
        #[arg(conflicts_with = "state")]
        preset: Option<String>,
        /// Explicit Cartesian state `x,y,z,px,py,pz`.
        #[arg(long, allow_hyphen_values = true)]
        state: Option<String>,
        /// End time.
        #[arg(long, default_value_t = 700.0)]
        tau: f64,
    },
    /// Poincare section z = 0, p_z > 0.
    Section {
        /// Dimensionless energy.
        #[arg(long, allow_negative_numbers = true)]
        h: f64,
        /// Angular momentum p_phi.
        #[arg(long, allow_negative_numbers = true)]
        pphi: f64,
        /// Number of seeds spread along p_r = 0 between the turning points.
        #[arg(long, default_value_t = 40)]
        seeds: usize,
        /// Explicit seed `r,p_r`; repeatable. Replaces the default seeds.
        #[arg(long = "seed", allow_hyphen_values = true)]
        seed_list: Vec<String>,
        /// Crossings to record per seed.
        #[arg(long, default_value_t = 2000)]
        crossings: usize,
    },
    /// Closed-form solutions on the invariant submanifolds.
    #[command(subcommand)]
    Analytic(AnalyticCmd),
    /// Morales-Ramis eigenvalue test (default: the degree-one part of the potential).
    GaloisCheck {
        /// Degree of homogeneity, `n` or `n/d`.
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        /// Comma-separated Hessian eigenvalues at the Darboux point.
        #[arg(long, allow_hyphen_values = true)]
        lambdas: Option<String>,
    },
}

#[derive(Subcommand)]
enum AnalyticCmd {
    /// Motion on the z-axis at rescaled energy h_z.
    Zaxis {
        /// Rescaled axial energy.
        #[arg(long)]
        hz: f64,
        /// Rows in the CSV.
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Turning points in the plane z = 0 and the orbit through the outer one.
    Radial {
        /// Rescaled radial energy.
        #[arg(long, allow_negative_numbers = true)]
        hr: f64,
        /// Rescaled angular momentum.
        #[arg(long, allow_negative_numbers = true)]
        cz: f64,
        /// Rows in the CSV.
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Elliptic-function orbit from the turning point u.
    Cnorbit {
        /// Turning radius the orbit starts from.
        #[arg(long)]
        u: f64,
        /// Rescaled angular momentum.
        #[arg(long, allow_negative_numbers = true)]
        cz: f64,
        /// Ratio delta / sigma.
        #[arg(long)]
        eta: f64,
        /// Rows in the CSV.
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

fn bad(msg: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        msg: msg.to_string(),
    }
}

fn numeric(msg: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        msg: msg.to_string(),
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            msg: format!("i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        bad(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("quadtrap: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let consts = PhysicalConstants::from_env().map_err(bad)?;
    let cfg = run_config(&cli.global)?;
    let g = &cli.global;
    match cli.cmd {
        Cmd::DepthTable => depth_table(g, &consts),
        Cmd::Orbit { preset, state, tau } => {
            orbit(g, &cfg, &consts, preset.as_deref(), state.as_deref(), tau)
        }
        Cmd::Section {
            h,
            pphi,
            seeds,
            seed_list,
            crossings,
        } => section(g, &cfg, &consts, h, pphi, seeds, &seed_list, crossings),
        Cmd::Analytic(a) => analytic(g, a),
        Cmd::GaloisCheck { k, lambdas } => galois(g, k.as_deref(), lambdas.as_deref()),
    }
}

fn run_config(g: &Global) -> Result<RunConfig, Failure> {
    let trap = TrapSpec::new(g.b1d, TrapSpec::default().d).map_err(bad)?;
    let state = RotorState::new(g.j, g.m, g.varpi).map_err(bad)?;
    let params = match (&g.molecule, g.sigma, g.delta) {
        (Some(name), None, None) => ParamSource::Molecule {
            name: name.clone(),
            state,
            trap,
        },
        (None, Some(sigma), Some(delta)) => ParamSource::Raw { sigma, delta },
        (None, None, None) => ParamSource::Published,
        _ => return Err(bad("use either --molecule or --sigma/--delta, not both")),
    };
    if g.delta_source.is_some() && matches!(params, ParamSource::Raw { .. }) {
        return Err(bad("--delta-source has no effect with an explicit --delta"));
    }
    let delta_source = match &g.delta_source {
        Some(s) => s.parse::<DeltaSource>().map_err(bad)?,
        None => DeltaSource::Caption,
    };
    if g.threads == Some(0) {
        return Err(bad("--threads must be at least 1"));
    }
    Ok(RunConfig {
        params,
        delta_source,
        rel_tol: g.rel_tol,
        abs_tol: g.abs_tol,
        threads: g.threads,
    })
}

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_svg(path: Option<&Path>, panels: &[Panel]) -> io::Result<()> {
    if let Some(p) = path {
        std::fs::write(p, render(panels))?;
    }
    Ok(())
}

fn csv_row(vals: &[f64]) -> String {
    vals.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn depth_table(g: &Global, consts: &PhysicalConstants) -> Outcome {
    let table = MoleculeTable::builtin();
    let trap = TrapSpec::new(g.b1d, TrapSpec::default().d).map_err(bad)?;
    let state = RotorState::new(g.j, g.m, g.varpi).map_err(bad)?;
    let names: Vec<String> = match &g.molecule {
        Some(n) => vec![table.get(n).map_err(bad)?.name.clone()],
        None => TABLE_ORDER.iter().map(|s| s.to_string()).collect(),
    };
    let mut w = sink(g.out.as_deref())?;
    writeln!(
        w,
        "molecule,Z,alpha_L,depth_uK,beta_L,spin_depth_K,quadratic_uK"
    )?;
    for name in names {
        let mol = table.get(&name).map_err(bad)?;
        let d = trap_depth_report(mol, &trap, &state, &VibronicConstants::H2_GROUND, consts);
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            mol.name,
            mol.z_a,
            d.alpha_l,
            d.linear_rough * 1e6,
            d.beta_l,
            d.spin_rough,
            d.quadratic_rough * 1e6
        )?;
    }
    w.flush()?;
    Ok(())
}

fn parse_floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| bad(format!("{what}: {e}")))?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(bad(format!(
            "{what} needs {n} finite comma-separated numbers"
        )));
    }
    Ok(v)
}

fn orbit(
    g: &Global,
    cfg: &RunConfig,
    consts: &PhysicalConstants,
    preset: Option<&str>,
    state: Option<&str>,
    tau: f64,
) -> Outcome {
    let params = cfg.resolve_params(consts)?;
    let opts = cfg.integrate_options()?;
    let start = match (preset, state) {
        (Some(name), _) => published_orbit(name).ok_or_else(|| {
            let names: Vec<&str> = PUBLISHED_ORBITS.iter().map(|(n, _)| *n).collect();
            bad(format!(
                "unknown preset `{name}` (expected one of {})",
                names.join(", ")
            ))
        })?,
        (None, Some(s)) => {
            let v = parse_floats(s, 6, "--state")?;
            CartesianState::new(v[0], v[1], v[2], v[3], v[4], v[5])
        }
        (None, None) => return Err(bad("give a preset name or --state")),
    };
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(bad(format!(
            "--tau must be finite and non-negative, got {tau}"
        )));
    }
    let (traj, failure) = if start.to_array() == [0.0; 6] {
        (rest_at_origin(tau, &params), None)
    } else {
        match integrate(&PhaseState::Cartesian(start), &params, tau, &opts) {
            Ok(t) => (t, None),
            Err(DynamicsError::Aborted(a)) => {
                let msg = format!("integration aborted: {}", a.diagnostic);
                (a.partial, Some(numeric(msg)))
            }
            Err(e) => return Err(bad(e)),
        }
    };
    let mut w = sink(g.out.as_deref())?;
    export::write_csv(&traj, &mut w)?;
    drop(w);
    write_svg(g.svg.as_deref(), &orbit_panels(&traj))?;
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

// The origin with zero momentum is an equilibrium; the force is undefined there.
fn rest_at_origin(tau: f64, params: &PotentialParams) -> Trajectory {
    let state = PhaseState::Cartesian(CartesianState::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
    let energy = state.energy(params).unwrap_or(0.0);
    let mut samples = vec![Sample {
        tau: 0.0,
        state,
        energy,
        p_phi: 0.0,
    }];
    if tau > 0.0 {
        samples.push(Sample {
            tau,
            state,
            energy,
            p_phi: 0.0,
        });
    }
    Trajectory {
        chart: Chart::Cartesian,
        samples,
        dense: DenseStore::None,
        accepted_steps: 0,
        rejected_steps: 0,
        evaluations: 0,
    }
}

fn orbit_panels(traj: &Trajectory) -> Vec<Panel> {
    let rec: Vec<[f64; 9]> = traj.samples.iter().map(export::record).collect();
    let line = |pts: Vec<(f64, f64)>| Series {
        points: pts,
        style: Style::Line,
        color: palette(0, 1),
    };
    vec![
        Panel {
            title: "meridian plane".into(),
            x_label: "r".into(),
            y_label: "z".into(),
            series: vec![line(rec.iter().map(|r| (r[1], r[2])).collect())],
            equal_aspect: true,
        },
        Panel {
            title: "projection on z = 0".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![line(rec.iter().map(|r| (r[6], r[7])).collect())],
            equal_aspect: true,
        },
    ]
}

#[allow(clippy::too_many_arguments)]
fn section(
    g: &Global,
    cfg: &RunConfig,
    consts: &PhysicalConstants,
    h: f64,
    pphi: f64,
    n_seeds: usize,
    seed_list: &[String],
    crossings: usize,
) -> Outcome {
    let params = cfg.resolve_params(consts)?;
    let opts = cfg.integrate_options()?;
    let spec = SectionSpec::new(h, pphi, crossings).map_err(bad)?;
    let seeds: Vec<Seed> = if seed_list.is_empty() {
        if n_seeds == 0 {
            return Err(bad("--seeds must be at least 1"));
        }
        default_seeds(h, pphi, n_seeds, &params)
            .map_err(|e| bad(format!("no admissible seeds: {e}")))?
    } else {
        let mut v = Vec::new();
        for (id, s) in seed_list.iter().enumerate() {
            let x = parse_floats(s, 2, "--seed")?;
            v.push(Seed {
                id,
                r: x[0],
                p_r: x[1],
            });
        }
        v
    };
    let admissible = seeds
        .iter()
        .filter(|s| seed_from_energy(h, pphi, s.r, s.p_r, &params).is_ok())
        .count();
    if admissible == 0 {
        return Err(bad("all seeds lie outside the energy surface"));
    }
    let result = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| numeric(format!("cannot start worker pool: {e}")))?
            .install(|| compute_section(&spec, &seeds, &params, &opts)),
        None => compute_section(&spec, &seeds, &params, &opts),
    };
    let mut w = sink(g.out.as_deref())?;
    writeln!(w, "seed_id,crossing_index,tau,r,p_r")?;
    for s in &result {
        for p in &s.points {
            writeln!(
                w,
                "{},{},{}",
                p.seed_id,
                p.crossing_index,
                csv_row(&[p.tau, p.r, p.p_r])
            )?;
        }
    }
    w.flush()?;
    drop(w);
    write_svg(g.svg.as_deref(), &[section_panel(h, pphi, &result)])?;
    let mut failed = 0;
    for s in &result {
        if let Some(n) = &s.note {
            eprintln!("seed {}: {n}", s.seed.id);
        }
        if let Some(e) = &s.aborted {
            eprintln!("seed {}: {e}", s.seed.id);
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(numeric(format!(
            "{failed} of {} seeds aborted; partial section written",
            result.len()
        )));
    }
    Ok(())
}

fn section_panel(h: f64, pphi: f64, result: &[SeedSection]) -> Panel {
    let n = result.len();
    Panel {
        title: format!("z = 0, p_z > 0;  h = {h}, p_phi = {pphi}"),
        x_label: "r".into(),
        y_label: "p_r".into(),
        series: result
            .iter()
            .enumerate()
            .map(|(i, s)| Series {
                points: s.points.iter().map(|p| (p.r, p.p_r)).collect(),
                style: Style::Dots,
                color: palette(i, n),
            })
            .collect(),
        equal_aspect: false,
    }
}

/// CSV to `--out` (or stdout) followed by the JSON summary on stdout.
fn emit_csv_and_json(g: &Global, header: &str, rows: &[Vec<f64>], summary: &Value) -> Outcome {
    {
        let mut w = sink(g.out.as_deref())?;
        writeln!(w, "{header}")?;
        for r in rows {
            writeln!(w, "{}", csv_row(r))?;
        }
        w.flush()?;
    }
    let mut out = io::stdout().lock();
    if g.out.is_none() {
        writeln!(out)?;
    }
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(summary).expect("json value")
    )?;
    Ok(())
}

fn analytic_failure(e: AnalyticError) -> Failure {
    match e {
        AnalyticError::NoRealSolution { .. } | AnalyticError::Elliptic(_) => numeric(e),
        _ => bad(e),
    }
}

fn cn_samples(orbit: &CnOrbit, samples: usize) -> Vec<Vec<f64>> {
    let n = samples.max(2);
    (0..n)
        .map(|i| {
            let tau = orbit.tau_period * i as f64 / (n - 1) as f64;
            vec![tau, orbit.r_of_tau(tau), orbit.rdot_of_tau(tau)]
        })
        .collect()
}

fn cn_summary(orbit: &CnOrbit) -> Value {
    let mut v = serde_json::to_value(orbit).expect("serialisable");
    v["p1_residual"] = json!(orbit.p1_residual());
    v["p2_residual"] = json!(orbit.p2_residual());
    v["opposite_turning_point"] = json!(orbit.opposite_turning_point());
    v
}

fn analytic(g: &Global, cmd: AnalyticCmd) -> Outcome {
    match cmd {
        AnalyticCmd::Zaxis { hz, samples } => {
            let z = z_axis_solution(hz).map_err(analytic_failure)?;
            let n = samples.max(2);
            let period = z.period();
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let t = period * i as f64 / (n - 1) as f64;
                    vec![t, z.z(t), z.velocity(t)]
                })
                .collect();
            let residual = rows
                .iter()
                .map(|r| z.energy_residual(r[0]).abs())
                .fold(0.0, f64::max);
            let (lo, hi) = z.turning_points();
            let summary = json!({
                "h_z": hz,
                "period": period,
                "turning_points": [lo, hi],
                "max_energy_residual": residual,
            });
            emit_csv_and_json(g, "t,z,z_dot", &rows, &summary)
        }
        AnalyticCmd::Radial { hr, cz, samples } => {
            let tp = radial_turning_points(hr, cz).map_err(analytic_failure)?;
            let min = radial_minimum(cz).map_err(analytic_failure)?;
            let mut summary = json!({
                "h_r": hr,
                "c_z": cz,
                "turning_points": tp,
                "r_min": min.r_min,
                "v_min": v_r(min.r_min, cz),
            });
            // the rescaled radial potential is the eta = 1 case of the cn-form orbit
            let rows = if tp.degenerate || cz == 0.0 {
                Vec::new()
            } else {
                let orbit = solve_cn_orbit(tp.r2, cz, 1.0).map_err(analytic_failure)?;
                summary["orbit"] = cn_summary(&orbit);
                cn_samples(&orbit, samples)
            };
            emit_csv_and_json(g, "tau,r,r_dot", &rows, &summary)
        }
        AnalyticCmd::Cnorbit {
            u,
            cz,
            eta,
            samples,
        } => {
            let orbit = solve_cn_orbit(u, cz, eta).map_err(analytic_failure)?;
            emit_csv_and_json(
                g,
                "tau,r,r_dot",
                &cn_samples(&orbit, samples),
                &cn_summary(&orbit),
            )
        }
    }
}

fn galois(g: &Global, k: Option<&str>, lambdas: Option<&str>) -> Outcome {
    let darboux = (k.is_none() && lambdas.is_none()).then(verify_darboux_v1);
    let (k, eigenvalues): (Rational, Vec<Rational>) = match &darboux {
        Some(d) => (d.k.clone(), d.eigenvalues.clone()),
        None => {
            let k = parse_rational(k.unwrap_or("1")).map_err(bad)?;
            let l = lambdas
                .ok_or_else(|| bad("--lambdas is required together with --k"))?
                .split(',')
                .map(|s| parse_rational(s.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(bad)?;
            (k, l)
        }
    };
    let report = morales_ramis_verdict(&k, &eigenvalues).map_err(bad)?;
    let mut v = serde_json::to_value(&report).expect("serialisable");
    let (verdict, witness) = match &report.verdict {
        Verdict::Pass { .. } => ("Pass", Value::Null),
        Verdict::Fail { witness } => ("Fail", json!(witness.to_string())),
    };
    v["verdict"] = json!(verdict);
    v["witness"] = witness;
    if let Some(d) = &darboux {
        v["darboux_point"] = json!({
            "d": d.d.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "c": d.c.to_string(),
        });
    }
    let mut w = sink(g.out.as_deref())?;
    writeln!(
        w,
        "{}",
        serde_json::to_string_pretty(&v).expect("json value")
    )?;
    w.flush()?;
    Ok(())
}
