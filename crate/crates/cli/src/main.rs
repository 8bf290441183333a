mod export;

use std::f64::consts::PI;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use srso3::cut::{atan_grid, sample_cut_locus};
use srso3::distance::{SolveOptions, DEFAULT_TOL};
use srso3::sphere::project;
use srso3::verify::{self, Profile, DEFAULT_SEED};
use srso3::{brute_force_distance, cut_time, diameter, geodesic_closed_form, GeodesicParam, Rotation};

use export::{Format, Kind, Row};

/// Tolerance on hand-entered rotations before they are snapped to SO(3).
const INPUT_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "srso3", version, about = "Sub-Riemannian geometry of SO(3): geodesics, cut locus, distance")]
struct Cli {
    /// Output format; scalar commands print a bare number when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Seed for randomized searches and checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Residual tolerance for the sub-Riemannian logarithm.
    #[arg(long, global = true, env = "SRSO3_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,

    /// Worker threads for grid work (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProfileArg {
    Quick,
    Full,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a geodesic from the identity at uniform times.
    Geodesic(GeodesicArgs),
    /// Cut time for one β, or cut points over a β range.
    CutTime(CutTimeArgs),
    /// Print the diameter π√3.
    Diameter,
    /// Sub-Riemannian distance from the identity to a rotation.
    Distance(DistanceArgs),
    /// Cut points on an atan-uniform β grid.
    CutLocus(CutLocusArgs),
    /// Sample the metric sphere of a given radius.
    Sphere(SphereArgs),
    /// Run the verification suite.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct GeodesicArgs {
    #[arg(long, default_value_t = 0.0)]
    phi0: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    t_max: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    steps: u32,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct CutTimeArgs {
    #[arg(long, conflicts_with_all = ["beta_min", "beta_max"], required_unless_present = "beta_min")]
    beta: Option<f64>,
    #[arg(long, requires = "beta_max")]
    beta_min: Option<f64>,
    #[arg(long, requires = "beta_min")]
    beta_max: Option<f64>,
    /// Number of uniformly spaced β values in the range.
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u32).range(1..))]
    count: u32,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct DistanceArgs {
    /// Nine entries, row-major.
    #[arg(long, num_args = 9, value_names = ["R11", "R12", "R13", "R21", "R22", "R23", "R31", "R32", "R33"],
          conflicts_with_all = ["axis", "angle"], required_unless_present = "axis")]
    matrix: Option<Vec<f64>>,
    /// Unit rotation axis.
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], requires = "angle")]
    axis: Option<Vec<f64>>,
    /// Rotation angle in radians.
    #[arg(long, requires = "axis")]
    angle: Option<f64>,
    /// Also run the brute-force control search for an upper bound.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 16)]
    segments: usize,
    #[arg(long, default_value_t = 200)]
    budget: usize,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct CutLocusArgs {
    #[arg(long, default_value_t = 201, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    #[arg(long, default_value_t = 5.0)]
    beta_max: f64,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SphereArgs {
    #[arg(long)]
    radius: f64,
    /// Size of the β grid before filtering by cut time.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    /// Number of φ0 values per β.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    phi_steps: u32,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Criterion numbers; all when omitted.
    #[arg(long = "criterion", value_name = "ID")]
    criteria: Vec<u8>,
    #[arg(long, value_enum, default_value_t = ProfileArg::Full)]
    profile: ProfileArg,
}

#[derive(Debug)]
enum Failure {
    Domain(String),
    Io(io::Error),
}

impl From<srso3::Error> for Failure {
    fn from(e: srso3::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn domain(msg: impl Into<String>) -> Failure {
    Failure::Domain(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.into()).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(domain(format!("cannot start {n} workers: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        // a closed pipe is not worth a diagnostic
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Failure> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match &cli.command {
        Command::Geodesic(a) => records(&mut out, cli, Kind::GeodesicSample, geodesic_rows(a)?),
        Command::CutTime(a) => cut_time_cmd(&mut out, cli, a),
        Command::Diameter => scalar(&mut out, diameter()),
        Command::Distance(a) => distance_cmd(&mut out, cli, a),
        Command::CutLocus(a) => cut_locus_cmd(&mut out, cli, a),
        Command::Sphere(a) => records(&mut out, cli, Kind::SpherePoint, sphere_rows(a)?),
        Command::Check(a) => check_cmd(&mut out, cli, a),
    }?;
    out.flush()?;
    Ok(code)
}

fn format_of(cli: &Cli) -> Format {
    cli.format.map_or(Format::Csv, Format::from)
}

fn records(out: &mut impl Write, cli: &Cli, kind: Kind, rows: Vec<Row>) -> Result<ExitCode, Failure> {
    export::write(out, format_of(cli), kind, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn scalar(out: &mut impl Write, x: f64) -> Result<ExitCode, Failure> {
    writeln!(out, "{x}")?;
    Ok(ExitCode::SUCCESS)
}

fn finite(name: &str, x: f64) -> Result<f64, Failure> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(domain(format!("--{name} must be finite")))
    }
}

/// Matrix entries followed by the projection `R·e1`.
fn pose(r: &Rotation) -> impl Iterator<Item = f64> {
    let p = project(r);
    r.to_row_major().into_iter().chain([p.x, p.y, p.z])
}

fn geodesic_rows(a: &GeodesicArgs) -> Result<Vec<Row>, Failure> {
    let phi0 = finite("phi0", a.phi0)?;
    let beta = finite("beta", a.beta)?;
    let t_max = finite("t-max", a.t_max)?;
    let p = GeodesicParam::new(phi0, beta);
    let steps = a.steps as usize;
    Ok((0..steps)
        .map(|k| {
            let t = if steps == 1 { t_max } else { t_max * k as f64 / (steps - 1) as f64 };
            Row::new().nums([t, phi0, beta]).nums(pose(&geodesic_closed_form(&p, t)))
        })
        .collect())
}

fn cut_row(cp: &srso3::CutPoint) -> Row {
    Row::new().nums([cp.beta, cp.t1]).nums(pose(&cp.endpoint)).text(cp.branch.name())
}

fn cut_time_cmd(out: &mut impl Write, cli: &Cli, a: &CutTimeArgs) -> Result<ExitCode, Failure> {
    if let Some(beta) = a.beta {
        let cp = cut_time(finite("beta", beta)?)?;
        return match cli.format {
            None => scalar(out, cp.t1),
            Some(_) => records(out, cli, Kind::CutPoint, vec![cut_row(&cp)]),
        };
    }
    let (lo, hi) = (a.beta_min.unwrap_or_default(), a.beta_max.unwrap_or_default());
    let (lo, hi) = (finite("beta-min", lo)?, finite("beta-max", hi)?);
    if lo > hi {
        return Err(domain("--beta-min exceeds --beta-max"));
    }
    let n = a.count as usize;
    let rows = (0..n)
        .map(|k| {
            let beta = if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
            cut_time(beta).map(|cp| cut_row(&cp))
        })
        .collect::<srso3::Result<Vec<_>>>()?;
    records(out, cli, Kind::CutPoint, rows)
}

fn cut_locus_cmd(out: &mut impl Write, cli: &Cli, a: &CutLocusArgs) -> Result<ExitCode, Failure> {
    let beta_max = finite("beta-max", a.beta_max)?;
    if beta_max < 0.0 {
        return Err(domain("--beta-max must be non-negative"));
    }
    let rows = sample_cut_locus(a.n as usize, beta_max)?.iter().map(cut_row).collect();
    records(out, cli, Kind::CutPoint, rows)
}

fn target(a: &DistanceArgs) -> Result<Rotation, Failure> {
    if let Some(m) = &a.matrix {
        let mut entries = [0.0; 9];
        entries.copy_from_slice(m);
        return Ok(Rotation::from_row_major(entries)?.reorthonormalized());
    }
    let axis = a.axis.as_deref().unwrap_or(&[]);
    let angle = a.angle.unwrap_or_default();
    let len = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !len.is_finite() || (len - 1.0).abs() > INPUT_TOL {
        return Err(domain(format!("--axis must be a unit vector (norm {len})")));
    }
    Ok(Rotation::from_axis_angle([axis[0], axis[1], axis[2]], finite("angle", angle)?)?)
}

fn distance_cmd(out: &mut impl Write, cli: &Cli, a: &DistanceArgs) -> Result<ExitCode, Failure> {
    let g = target(a)?;
    let tol = cli.tol;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(domain("--tol must be a positive number"));
    }
    let res = srso3::distance::sr_log_with(&g, &SolveOptions::with_tol(tol))?;
    let bound = if a.oracle {
        Some(brute_force_distance(&g, a.segments, a.budget, cli.seed)?)
    } else {
        None
    };
    if cli.format.is_none() {
        return scalar(out, res.distance);
    }
    let (len, mismatch) = bound.map_or((f64::NAN, f64::NAN), |b| (b.length, b.mismatch));
    let row = Row::new()
        .nums([res.distance, res.param.phi0(), res.param.beta(), res.time, res.residual])
        .text(res.multiplicity.name())
        .nums([len, mismatch]);
    records(out, cli, Kind::Distance, vec![row])
}

/// `β` grid whose cut time reaches `radius`. Every admissible `β` satisfies
/// `t1(β) ≤ 2π/√(1+β²)`, which bounds the grid; the extremes and the peak of
/// the cut time are added so that short grids still touch the boundary.
fn sphere_betas(radius: f64, n: usize) -> Result<Vec<f64>, Failure> {
    let beta_max = ((2.0 * PI / radius).powi(2) - 1.0).sqrt();
    let mut betas = atan_grid(n, beta_max);
    betas.extend([beta_max, -beta_max, srso3::CRITICAL_BETA, -srso3::CRITICAL_BETA]);
    let mut kept = Vec::with_capacity(betas.len());
    for beta in betas {
        // a few ulps of slack so the peak survives at the diameter
        if cut_time(beta)?.t1 >= radius * (1.0 - 4.0 * f64::EPSILON) {
            kept.push(beta);
        }
    }
    kept.sort_by(f64::total_cmp);
    kept.dedup();
    Ok(kept)
}

fn sphere_rows(a: &SphereArgs) -> Result<Vec<Row>, Failure> {
    let radius = finite("radius", a.radius)?;
    let max = PI * 3f64.sqrt();
    if !(radius > 0.0 && radius <= max) {
        return Err(domain(format!("--radius must lie in (0, {max}]")));
    }
    let mut rows = Vec::new();
    for beta in sphere_betas(radius, a.n as usize)? {
        let t1 = cut_time(beta)?.t1;
        for k in 0..a.phi_steps {
            let phi0 = -PI + 2.0 * PI * f64::from(k) / f64::from(a.phi_steps);
            let r = geodesic_closed_form(&GeodesicParam::new(phi0, beta), radius);
            rows.push(Row::new().nums([radius, phi0, beta, t1]).nums(pose(&r)));
        }
    }
    Ok(rows)
}

fn check_cmd(out: &mut impl Write, cli: &Cli, a: &CheckArgs) -> Result<ExitCode, Failure> {
    let profile = match a.profile {
        ProfileArg::Quick => Profile::Quick,
        ProfileArg::Full => Profile::Full,
    };
    let ids: Vec<u8> = if a.criteria.is_empty() {
        verify::CRITERIA.iter().map(|c| c.0).collect()
    } else {
        a.criteria.clone()
    };
    let mut rows = Vec::new();
    let mut all_passed = true;
    for id in ids {
        let o = verify::run(id, profile, cli.seed).ok_or_else(|| domain(format!("no criterion {id}")))?;
        // timings vary between runs, so they go to stderr
        eprintln!("{o}");
        all_passed &= o.passed;
        rows.push(
            Row::new()
                .int(o.id.into())
                .text(o.name)
                .int(o.passed.into())
                .nums([o.observed, o.bound, o.time_limit.as_secs_f64()]),
        );
    }
    export::write(out, format_of(cli), Kind::Check, &rows)?;
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn sphere_grid_respects_cut_time() {
        for radius in [0.5, PI, 4.0, 5.0] {
            let betas = sphere_betas(radius, 33).unwrap();
            assert!(!betas.is_empty());
            assert!(betas.iter().all(|&b| cut_time(b).unwrap().t1 >= radius * (1.0 - 1e-15)));
        }
        // at the diameter only the two peaks survive
        let peak = sphere_betas(PI * 3f64.sqrt(), 33).unwrap();
        assert!(peak.iter().all(|b| (b.abs() - srso3::CRITICAL_BETA).abs() < 1e-12));
        assert!(peak.first() < Some(&0.0) && peak.last() > Some(&0.0));
    }

    #[test]
    fn radius_out_of_range() {
        let args = |radius| SphereArgs { radius, n: 4, phi_steps: 4 };
        assert!(sphere_rows(&args(0.0)).is_err());
        assert!(sphere_rows(&args(5.5)).is_err());
        assert!(sphere_rows(&args(SQRT_2)).is_ok());
    }
}
