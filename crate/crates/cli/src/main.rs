use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edscat::alternate::invert_alternate;
use edscat::direct::{
    find_bound_states, scattering_with_diagnostics, simple_norming_constants, BoundStateSearchRegion, DirectConfig,
};
use edscat::inverse::{invert, reflectionless_data, EnergyDependentData, InversionConfig};
use edscat::marchenko::{build_kernel_from_data, nystrom_solution, recover_potentials, separable_solution};
use edscat::model::io::{self, Document};
use edscat::model::{
    build_triplets, BoundState, BoundStateTriplets, PotentialPair, ScatteringMatrixData, SpatialGrid, SpectralAxis,
    SpectralGrid, Variant,
};
use edscat::numerics::{max_abs, max_abs_diff};
use edscat::Error;
use num_complex::Complex64 as C64;

mod output;

use output::{columns, digest, plot_path, Report, Staged};

#[derive(Parser)]
#[command(name = "edscat", version, about = "Direct and inverse scattering for energy-dependent Schrodinger systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering data of a potential pair, optionally with its bound states.
    Direct {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Search both half planes and write the bound-state triplets here.
        #[arg(long, value_name = "PATH")]
        bound_states: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Axis::Lambda)]
        axis: Axis,
        #[command(flatten)]
        common: Common,
    },
    /// Potentials from scattering data.
    Invert {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Bound-state triplets matching the data; none if omitted.
        #[arg(long, value_name = "PATH")]
        triplets: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Marchenko5)]
        method: Method,
        #[command(flatten)]
        common: Common,
    },
    /// Direct solve, inversion and comparison with the input potential.
    Roundtrip {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Marchenko5)]
        method: Method,
        /// Locate bound states and pass them to the inversion.
        #[arg(long)]
        with_bound_states: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Reflectionless data and the exact potentials for a triplet file.
    Synth {
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        data_out: PathBuf,
        #[arg(long, value_name = "PATH")]
        potential_out: PathBuf,
        /// Must agree with the variant recorded in the triplet file.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Spatial grid of the output potentials.
    #[arg(long, value_name = "x_min:x_max:n", allow_hyphen_values = true)]
    grid: Option<GridSpec>,
    /// Uniform spectral grid.
    #[arg(long, value_name = "l_min:l_max:n", allow_hyphen_values = true)]
    spectral: Option<GridSpec>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<TolOverride>,
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Write column files PREFIX_<quantity>.dat.
    #[arg(long, value_name = "PREFIX")]
    plot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Marchenko5,
    Alternate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Lambda,
    Zeta,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Qr,
    Uv,
    Ps,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Qr => Variant::EnergyDependent,
            VariantArg::Uv => Variant::Uv,
            VariantArg::Ps => Variant::Ps,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct GridSpec {
    lo: f64,
    hi: f64,
    n: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected min:max:n, got {s}"));
        }
        let f = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
        let n = parts[2].trim().parse::<usize>().map_err(|e| format!("{}: {e}", parts[2]))?;
        Ok(GridSpec { lo: f(parts[0])?, hi: f(parts[1])?, n })
    }
}

#[derive(Clone, Debug)]
struct TolOverride {
    name: String,
    value: f64,
}

const TOL_NAMES: &[&str] = &[
    "substeps",
    "boundary",
    "drift",
    "singular",
    "overflow",
    "proportionality",
    "decay",
    "relation",
    "kernel_decay",
    "residual",
    "cond",
    "phase",
    "output_decay",
];

impl FromStr for TolOverride {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s}"))?;
        if !TOL_NAMES.contains(&name) {
            return Err(format!("unknown tolerance {name}; known: {}", TOL_NAMES.join(", ")));
        }
        let value: f64 = value.parse().map_err(|e| format!("{value}: {e}"))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("tolerance {name} must be positive"));
        }
        Ok(TolOverride { name: name.to_string(), value })
    }
}

/// Error record printed on stderr; the code is the process exit status.
struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let mut inner = &e;
        while let Error::Step { source, .. } = inner {
            inner = source;
        }
        let debug = format!("{inner:?}");
        let kind = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string();
        Failure {
            code: if e.is_validation() { 2 } else { 3 },
            kind,
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure { code: 2, kind: "Invalid".into(), message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error, code: u8) -> Self {
        Failure { code, kind: "Io".into(), message: format!("{}: {e}", path.display()) }
    }
}

type Outcome<T> = Result<T, Failure>;

struct Settings {
    direct: DirectConfig,
    decay: Option<f64>,
    relation: Option<f64>,
    kernel_decay: Option<f64>,
    residual: Option<f64>,
    cond: Option<f64>,
    phase: Option<f64>,
    output_decay: Option<f64>,
}

impl Settings {
    fn from(tols: &[TolOverride]) -> Outcome<Self> {
        let mut s = Settings {
            direct: DirectConfig::default(),
            decay: None,
            relation: None,
            kernel_decay: None,
            residual: None,
            cond: None,
            phase: None,
            output_decay: None,
        };
        for t in tols {
            let v = t.value;
            match t.name.as_str() {
                "substeps" => {
                    if v.fract() != 0.0 {
                        return Err(Failure::validation("substeps must be an integer"));
                    }
                    s.direct.substeps = v as usize;
                }
                "boundary" => s.direct.boundary_tol = v,
                "drift" => s.direct.wronskian_drift_tol = v,
                "singular" => s.direct.singular_tol = v,
                "overflow" => s.direct.overflow_limit = v,
                "proportionality" => s.direct.proportionality_tol = v,
                "decay" => s.decay = Some(v),
                "relation" => s.relation = Some(v),
                "kernel_decay" => s.kernel_decay = Some(v),
                "residual" => s.residual = Some(v),
                "cond" => s.cond = Some(v),
                "phase" => s.phase = Some(v),
                "output_decay" => s.output_decay = Some(v),
                _ => unreachable!("names are checked while parsing"),
            }
        }
        Ok(s)
    }

    fn inversion(&self, grid: SpatialGrid) -> InversionConfig {
        let mut cfg = InversionConfig::new(grid);
        if let Some(v) = self.kernel_decay {
            cfg.kernel.decay_tol = v;
        }
        if let Some(v) = self.residual {
            cfg.nystrom.residual_tol = v;
        }
        if let Some(v) = self.cond {
            cfg.nystrom.max_cond = v;
        }
        if let Some(v) = self.phase {
            cfg.phase_tol = v;
        }
        if let Some(v) = self.output_decay {
            cfg.output_decay_tol = v;
        }
        cfg
    }
}

const DEFAULT_SPECTRAL: GridSpec = GridSpec { lo: -40.0, hi: 40.0, n: 1600 };
const DEFAULT_GRID: GridSpec = GridSpec { lo: -10.0, hi: 10.0, n: 201 };

fn spatial(spec: GridSpec) -> Outcome<SpatialGrid> {
    Ok(SpatialGrid::new(spec.lo, spec.hi, spec.n)?)
}

fn spectral(spec: Option<GridSpec>, axis: SpectralAxis) -> Outcome<SpectralGrid> {
    let s = spec.unwrap_or(DEFAULT_SPECTRAL);
    Ok(SpectralGrid::uniform(s.lo, s.hi, s.n, axis)?)
}

struct Input {
    doc: Document,
    digest: String,
}

fn read(path: &Path) -> Outcome<Input> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e, 2))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Failure::validation(format!("{}: not UTF-8", path.display())))?;
    Ok(Input { doc: io::from_str(text)?, digest: digest(&bytes) })
}

fn read_potential(path: &Path, s: &Settings) -> Outcome<(PotentialPair, String)> {
    let inp = read(path)?;
    let Document::Potential(p) = inp.doc else {
        return Err(Failure::validation(format!("{}: expected a potential-pair file", path.display())));
    };
    let p = match s.decay {
        Some(tol) => PotentialPair::with_decay_tol(p.grid, p.first, p.second, p.variant, tol)?,
        None => p,
    };
    Ok((p, inp.digest))
}

fn read_scattering(path: &Path) -> Outcome<(ScatteringMatrixData, String)> {
    let inp = read(path)?;
    match inp.doc {
        Document::Scattering(d) => Ok((d, inp.digest)),
        _ => Err(Failure::validation(format!("{}: expected a scattering-data file", path.display()))),
    }
}

fn read_triplets(path: &Path) -> Outcome<(Variant, BoundStateTriplets, String)> {
    let inp = read(path)?;
    match inp.doc {
        Document::Triplets(v, t) => Ok((v, t, inp.digest)),
        _ => Err(Failure::validation(format!("{}: expected a triplets file", path.display()))),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn plot_potential(staged: &mut Staged, prefix: &Path, pot: &PotentialPair, report: &mut Report) -> Outcome<()> {
    let (a, b) = match pot.variant {
        Variant::EnergyDependent => ("q", "r"),
        Variant::Uv => ("u", "v"),
        Variant::Ps => ("p", "s"),
    };
    let xs = pot.grid.points();
    for (name, vals) in [(a, &pot.first), (b, &pot.second)] {
        let path = plot_path(prefix, name);
        staged.write(&path, &columns(&xs, vals)).map_err(|e| Failure::io(&path, e, 3))?;
        report.set(&format!("plot.{name}"), path_str(&path));
    }
    Ok(())
}

fn plot_scattering(staged: &mut Staged, prefix: &Path, d: &ScatteringMatrixData, report: &mut Report) -> Outcome<()> {
    let xs = d.grid.values();
    for (name, vals) in
        [("T", &d.t), ("R", &d.r), ("L", &d.l), ("T_bar", &d.t_bar), ("R_bar", &d.r_bar), ("L_bar", &d.l_bar)]
    {
        let path = plot_path(prefix, name);
        staged.write(&path, &columns(xs, vals)).map_err(|e| Failure::io(&path, e, 3))?;
        report.set(&format!("plot.{name}"), path_str(&path));
    }
    Ok(())
}

/// Bound states in both half planes with simple-pole norming constants.
fn bound_states(pot: &PotentialPair, cfg: &DirectConfig, report: &mut Report) -> Outcome<BoundStateTriplets> {
    let mut sets = Vec::new();
    let mut worst: f64 = 0.0;
    for region in [BoundStateSearchRegion::default_upper(), BoundStateSearchRegion::default_lower()] {
        let mut states = Vec::new();
        for (lambda, m) in find_bound_states(pot, &region, cfg)? {
            let nc = simple_norming_constants(pot, lambda, m, cfg)?;
            worst = worst.max(nc.residual);
            states.push(BoundState::simple(nc.lambda, nc.value));
        }
        sets.push(states);
    }
    report.set("bound_states.upper", sets[0].len());
    report.set("bound_states.lower", sets[1].len());
    report.number("residual.norming_proportionality", worst);
    Ok(build_triplets(&sets[0], &sets[1])?)
}

fn direct_stage(
    pot: &PotentialPair,
    sg: &SpectralGrid,
    s: &Settings,
    report: &mut Report,
) -> Outcome<ScatteringMatrixData> {
    let (mut data, diag) = scattering_with_diagnostics(pot, sg, &s.direct)?;
    if let Some(t) = s.relation {
        data.relation_tol = t;
    }
    report.number("residual.wronskian_drift", diag.max_drift);
    report.number("residual.relation", diag.max_relation_residual);
    report.set("spectral_singular_points", diag.singular.len());
    Ok(data)
}

struct Inverted {
    potentials: PotentialPair,
    phase: Option<C64>,
}

/// Runs the requested inversion and records its diagnostics.
fn inversion_stage(
    data: &ScatteringMatrixData,
    triplets: BoundStateTriplets,
    method: Method,
    cfg: &InversionConfig,
    report: &mut Report,
) -> Outcome<Inverted> {
    if data.variant != Variant::EnergyDependent {
        if let Method::Alternate = method {
            return Err(Failure::validation("the alternate method needs energy-dependent data"));
        }
        report.set("method", "marchenko");
        let separable = data.is_reflectionless();
        let sol = if separable {
            separable_solution(&triplets, cfg.grid, data.variant)?
        } else {
            let kernel = build_kernel_from_data(data, &triplets, cfg.grid, &cfg.kernel)?;
            nystrom_solution(&kernel, &cfg.nystrom)?
        };
        let rec = recover_potentials(&sol, cfg.output_decay_tol)?;
        report.set("separable", separable);
        report.number("residual.nystrom", sol.max_residual());
        report.number("residual.diagonal", rec.diagonal_residual);
        report.set("warnings", rec.warning.into_iter().collect::<Vec<_>>());
        return Ok(Inverted { potentials: rec.potentials, phase: None });
    }
    let ed = EnergyDependentData::new(data.clone(), triplets)?;
    match method {
        Method::Marchenko5 => {
            let inv = invert(&ed, cfg)?;
            let d = &inv.diagnostics;
            report.set("method", "marchenko5");
            report.complex("phase", d.phase.phase);
            report.complex("phase_from_t_bar", d.phase.from_t_bar);
            report.number("residual.phase_disagreement", d.phase.disagreement);
            report.number("residual.diagonal_uv", d.diagonal_residual_uv);
            report.number("residual.diagonal_ps", d.diagonal_residual_ps);
            report.number("residual.product", d.product_residual);
            report.number("residual.nystrom", d.max_nystrom_residual);
            report.set("separable", d.separable);
            report.set("warnings", d.warnings.clone());
            Ok(Inverted { potentials: inv.potentials, phase: Some(d.phase.phase) })
        }
        Method::Alternate => {
            let alt = invert_alternate(&ed, cfg)?;
            report.set("method", "alternate");
            report.complex("phase", alt.phase.phase);
            report.complex("phase_from_t_bar", alt.phase.from_t_bar);
            report.number("residual.phase_disagreement", alt.phase.disagreement);
            report.number("residual.g_derivative", alt.derivative_residual);
            report.number("residual.alternate_system", alt.max_residual);
            report.set("stencil_fallback", alt.stencil_fallback);
            Ok(Inverted { potentials: alt.potentials, phase: Some(alt.phase.phase) })
        }
    }
}

fn cmd_direct(
    input: &Path,
    output: &Path,
    bound: Option<&Path>,
    axis: Axis,
    c: &Common,
    report: &mut Report,
    staged: &mut Staged,
) -> Outcome<()> {
    let s = Settings::from(&c.tol)?;
    let (pot, dig) = read_potential(input, &s)?;
    report.set("input_digest", dig);
    let axis = match axis {
        Axis::Lambda => SpectralAxis::Lambda,
        Axis::Zeta => SpectralAxis::Zeta,
    };
    let sg = spectral(c.spectral, axis)?;
    let data = direct_stage(&pot, &sg, &s, report)?;
    if let Some(path) = bound {
        let t = bound_states(&pot, &s.direct, report)?;
        staged.document(path, &Document::Triplets(pot.variant, t)).map_err(|e| Failure::io(path, e, 3))?;
        report.set("output.triplets", path_str(path));
    }
    if let Some(prefix) = &c.plot {
        plot_scattering(staged, prefix, &data, report)?;
    }
    staged.document(output, &Document::Scattering(data)).map_err(|e| Failure::io(output, e, 3))?;
    report.set("output.data", path_str(output));
    Ok(())
}

fn cmd_invert(
    input: &Path,
    output: &Path,
    triplets: Option<&Path>,
    method: Method,
    c: &Common,
    report: &mut Report,
    staged: &mut Staged,
) -> Outcome<()> {
    let s = Settings::from(&c.tol)?;
    let (data, dig) = read_scattering(input)?;
    report.set("input_digest", dig);
    let t = match triplets {
        Some(path) => {
            let (v, t, dig) = read_triplets(path)?;
            if v != data.variant {
                return Err(Failure::validation(format!(
                    "triplets describe {} but the data are {}",
                    v.tag(),
                    data.variant.tag()
                )));
            }
            report.set("triplets_digest", dig);
            t
        }
        None => BoundStateTriplets::empty(),
    };
    let grid = spatial(c.grid.unwrap_or(DEFAULT_GRID))?;
    let inv = inversion_stage(&data, t, method, &s.inversion(grid), report)?;
    if let Some(prefix) = &c.plot {
        plot_potential(staged, prefix, &inv.potentials, report)?;
    }
    staged.document(output, &Document::Potential(inv.potentials)).map_err(|e| Failure::io(output, e, 3))?;
    report.set("output.potential", path_str(output));
    Ok(())
}

/// Largest subsample of `grid` with spacing at most 0.1.
fn default_inversion_grid(grid: SpatialGrid) -> SpatialGrid {
    let intervals = grid.len() - 1;
    let cap = ((0.1 + 1e-12) / grid.h()).floor().max(1.0) as usize;
    let stride = (1..=cap.min(intervals)).rev().find(|s| intervals % s == 0).unwrap_or(1);
    grid.subsample(stride).expect("stride divides the interval count")
}

fn cmd_roundtrip(
    input: &Path,
    method: Method,
    with_bound: bool,
    c: &Common,
    report: &mut Report,
    staged: &mut Staged,
) -> Outcome<()> {
    let s = Settings::from(&c.tol)?;
    let (pot, dig) = read_potential(input, &s)?;
    report.set("input_digest", dig);
    if pot.variant != Variant::EnergyDependent {
        return Err(Failure::validation("roundtrip takes a (q, r) potential file"));
    }
    let out = match c.grid {
        Some(g) => spatial(g)?,
        None => default_inversion_grid(pot.grid),
    };
    let stride = pot
        .grid
        .stride_to(&out)
        .ok_or_else(|| Failure::validation("--grid must be a subsample of the potential grid"))?;
    let sg = spectral(c.spectral, SpectralAxis::Lambda)?;
    let data = direct_stage(&pot, &sg, &s, report).map_err(|f| tag(f, "direct"))?;
    let triplets = if with_bound {
        bound_states(&pot, &s.direct, report).map_err(|f| tag(f, "bound states"))?
    } else {
        BoundStateTriplets::empty()
    };
    let inv = inversion_stage(&data, triplets, method, &s.inversion(out), report).map_err(|f| tag(f, "invert"))?;
    let pick = |v: &[C64]| (0..out.len()).map(|i| v[i * stride]).collect::<Vec<_>>();
    let (q, r) = (pick(&pot.first), pick(&pot.second));
    let rel = |a: &[C64], b: &[C64]| {
        let m = max_abs(b);
        if m == 0.0 {
            max_abs(a)
        } else {
            max_abs_diff(a, b) / m
        }
    };
    let rec = &inv.potentials;
    report.number("error.q_abs", max_abs_diff(&rec.first, &q));
    report.number("error.r_abs", max_abs_diff(&rec.second, &r));
    report.number("error.q_rel", rel(&rec.first, &q));
    report.number("error.r_rel", rel(&rec.second, &r));
    if let Some(p) = inv.phase {
        let g = edscat::gauge::compute_gauge(&pot)?;
        report.number("error.phase", (p - g.phase).norm());
    }
    if let Some(prefix) = &c.plot {
        plot_potential(staged, prefix, rec, report)?;
    }
    Ok(())
}

fn tag(mut f: Failure, step: &str) -> Failure {
    f.message = format!("{step}: {}", f.message);
    f
}

fn cmd_synth(
    input: &Path,
    data_out: &Path,
    pot_out: &Path,
    variant: Option<VariantArg>,
    c: &Common,
    report: &mut Report,
    staged: &mut Staged,
) -> Outcome<()> {
    let s = Settings::from(&c.tol)?;
    let (v, t, dig) = read_triplets(input)?;
    report.set("input_digest", dig);
    if let Some(arg) = variant {
        if Variant::from(arg) != v {
            return Err(Failure::validation(format!("--variant disagrees with the file variant {}", v.tag())));
        }
    }
    report.set("variant", v.tag());
    let sg = spectral(c.spectral, SpectralAxis::Lambda)?;
    let (data, warn) = reflectionless_data(&t, &sg, v)?;
    report.set("warnings", warn.into_iter().collect::<Vec<_>>());
    let grid = spatial(c.grid.unwrap_or(DEFAULT_GRID))?;
    let cfg = s.inversion(grid);
    let pot = if v == Variant::EnergyDependent {
        let inv = invert(&EnergyDependentData::new(data.clone(), t)?, &cfg)?;
        report.number("residual.product", inv.diagnostics.product_residual);
        report.number("residual.diagonal_uv", inv.diagnostics.diagonal_residual_uv);
        report.number("residual.diagonal_ps", inv.diagnostics.diagonal_residual_ps);
        inv.potentials
    } else {
        let rec = recover_potentials(&separable_solution(&t, grid, v)?, cfg.output_decay_tol)?;
        report.number("residual.diagonal", rec.diagonal_residual);
        rec.potentials
    };
    if let Some(prefix) = &c.plot {
        plot_potential(staged, prefix, &pot, report)?;
    }
    staged.document(data_out, &Document::Scattering(data)).map_err(|e| Failure::io(data_out, e, 3))?;
    staged.document(pot_out, &Document::Potential(pot)).map_err(|e| Failure::io(pot_out, e, 3))?;
    report.set("output.data", path_str(data_out));
    report.set("output.potential", path_str(pot_out));
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    let start = Instant::now();
    let mut staged = Staged::default();
    let (name, common) = match &cli.command {
        Command::Direct { common, .. } => ("direct", common),
        Command::Invert { common, .. } => ("invert", common),
        Command::Roundtrip { common, .. } => ("roundtrip", common),
        Command::Synth { common, .. } => ("synth", common),
    };
    let mut report = Report::new(name);
    match &cli.command {
        Command::Direct { input, output, bound_states, axis, common } => {
            cmd_direct(input, output, bound_states.as_deref(), *axis, common, &mut report, &mut staged)?
        }
        Command::Invert { input, output, triplets, method, common } => {
            cmd_invert(input, output, triplets.as_deref(), *method, common, &mut report, &mut staged)?
        }
        Command::Roundtrip { input, method, with_bound_states, common } => {
            cmd_roundtrip(input, *method, *with_bound_states, common, &mut report, &mut staged)?
        }
        Command::Synth { input, data_out, potential_out, variant, common } => {
            cmd_synth(input, data_out, potential_out, *variant, common, &mut report, &mut staged)?
        }
    }
    report.number("wall_time_s", start.elapsed().as_secs_f64());
    let text = report.render();
    match &common.report {
        Some(path) => staged.write(path, &text).map_err(|e| Failure::io(path, e, 3))?,
        None => print!("{text}"),
    }
    staged.commit().map_err(|e| Failure::io(Path::new("output"), e, 3))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let rec = serde_json::json!({
                "status": "error",
                "exit_code": f.code,
                "kind": f.kind,
                "message": f.message,
            });
            eprintln!("{rec}");
            ExitCode::from(f.code)
        }
    }
}
