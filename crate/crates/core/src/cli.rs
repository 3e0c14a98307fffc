//! Command-line front end. Parsing and I/O only; all numerics live in the
//! library modules.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 a
//! verification check failed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::flow::FlowStructure;
use crate::geometry::{TreeGeometry, Vertex};
use crate::kernels::{kernel_row, tabulate, KernelFamily};
use crate::operators::{apply_row, maximal_on, MaximalSpec, TreeFunction};
use crate::special::QuadratureSpec;
use crate::verify::{run_check, run_suite, VerifyConfig, CHECK_IDS};
use crate::weights::{check_thm1_i, check_thm2_i, check_thm3_g, ClosedForm, WeightSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tree-heat", version, about = "Heat, stable and wave semigroups on homogeneous trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, env = "TREE_HEAT_ABS_TOL")]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, env = "TREE_HEAT_REL_TOL")]
    pub rel_tol: Option<f64>,
    /// Subdivision budget of one adaptive integral.
    #[arg(long, global = true, env = "TREE_HEAT_MAX_SUBDIVISIONS")]
    pub max_subdivisions: Option<usize>,
}

impl QuadArgs {
    pub fn spec(&self) -> Result<QuadratureSpec> {
        let d = QuadratureSpec::default();
        let s = QuadratureSpec {
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            max_subdivisions: self.max_subdivisions.unwrap_or(d.max_subdivisions),
            ..d
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Heat,
    Stable,
    Wave,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    /// Stability index in (0, 2); required by `stable`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Wave index > 0; required by `wave`.
    #[arg(long)]
    pub nu: Option<f64>,
}

impl FamilyArgs {
    pub fn family(&self) -> Result<KernelFamily> {
        let fam = match (self.family, self.alpha, self.nu) {
            (FamilyName::Heat, None, None) => KernelFamily::Heat,
            (FamilyName::Stable, Some(alpha), None) => KernelFamily::Stable { alpha },
            (FamilyName::Wave, None, Some(nu)) => KernelFamily::Wave { nu },
            (FamilyName::Heat, ..) => return Err(Error::domain("--family heat takes neither --alpha nor --nu")),
            (FamilyName::Stable, ..) => return Err(Error::domain("--family stable needs --alpha and no --nu")),
            (FamilyName::Wave, ..) => return Err(Error::domain("--family wave needs --nu and no --alpha")),
        };
        fam.validate()?;
        Ok(fam)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a radial kernel on a ball.
    Kernel {
        #[arg(long)]
        q: u32,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 25)]
        radius: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply `K_t` to a function given as `vertex,value` CSV.
    Apply {
        #[arg(long)]
        q: u32,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        t: f64,
        /// Radius of the ball carrying both the input and the output.
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated maximal function `sup_{t<R} |K_t f|` on a ball.
    Maximal {
        #[arg(long)]
        q: u32,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long = "R")]
        r: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        refinement_rounds: usize,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Admissibility verdict of a weight, as JSON.
    Weights {
        #[arg(long)]
        q: u32,
        #[arg(long, value_enum)]
        condition: ConditionName,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long = "R")]
        r: Option<f64>,
        /// Closed form in k, e.g. `2*q^(-1*k)*(1+k)^(-2)`.
        #[arg(long, conflicts_with_all = ["weight_csv", "preset"])]
        weight: Option<String>,
        /// `k,value` (radial) or `vertex,value` (explicit) CSV.
        #[arg(long)]
        weight_csv: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "weight_csv")]
        preset: Option<Preset>,
        /// Ball radius used for partial sums.
        #[arg(long, default_value_t = 40)]
        radius: usize,
        /// Base vertex.
        #[arg(long, default_value = "o")]
        x: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification checks and emit a JSON array of reports.
    Verify {
        #[arg(long, value_enum, conflicts_with = "check")]
        suite: Option<Suite>,
        #[arg(long)]
        check: Option<String>,
        /// Restrict q-dependent checks to this q where their grid contains it.
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory receiving one `<check-id>.csv` of detail rows per check.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Flow heat semigroup `𝕎_t f` on a ball.
    Flow {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        radius: usize,
        /// `vertex,value` CSV; a delta at the root when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionName {
    #[value(name = "thm1-i")]
    Thm1I,
    #[value(name = "thm2-i")]
    Thm2I,
    #[value(name = "thm3-g")]
    Thm3G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// `u ≡ 1`.
    One,
    /// `u_k = q^{-k} (1+k)^{-2}`.
    Critical,
    /// `u_k = H_1(k)`.
    Heat1,
}

impl Preset {
    fn form(self) -> ClosedForm {
        match self {
            Preset::One => ClosedForm::constant(1.0),
            Preset::Critical => ClosedForm::new(1.0, -1.0, -2.0),
            Preset::Heat1 => ClosedForm::constant(1.0).with_heat(1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
}

/// Parses `args` and runs; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let spec = cli.quad.spec()?;
    match &cli.command {
        Command::Kernel { q, family, t, radius, out } => {
            let k = tabulate(TreeGeometry::new(*q, *radius)?, family.family()?, *t, &spec)?;
            let mut buf = Vec::new();
            k.write_csv(&mut buf)?;
            emit(out.as_deref(), &buf)?;
        }
        Command::Apply { q, family, t, radius, input, out } => {
            let geom = TreeGeometry::new(*q, *radius)?;
            let f = read_function(geom, input)?;
            let row = kernel_row(*q, family.family()?, *t, 2 * radius, &spec)?;
            let xs = geom.enumerate_ball();
            let vals = xs.iter().map(|x| apply_row(&row, &f, x)).collect::<Result<Vec<_>>>()?;
            let rows = xs.iter().zip(&vals).map(|(x, v)| vec![x.to_string(), sci(*v)]);
            emit(out.as_deref(), &csv_bytes(&["vertex", "value"], rows)?)?;
        }
        Command::Maximal { q, family, r, grid, refinement_rounds, radius, input, out } => {
            let geom = TreeGeometry::new(*q, *radius)?;
            let f = read_function(geom, input)?;
            let mspec = MaximalSpec::log_grid(*r, *grid, *refinement_rounds)?;
            let xs = geom.enumerate_ball();
            let vals = maximal_on(family.family()?, &f, &xs, &mspec, &spec)?;
            let rows = xs.iter().zip(&vals).map(|(x, m)| vec![x.to_string(), sci(m.value), sci(m.argmax_t)]);
            emit(out.as_deref(), &csv_bytes(&["vertex", "value", "argmax_t"], rows)?)?;
        }
        Command::Weights { q, condition, p, alpha, nu, r, weight, weight_csv, preset, radius, x, out } => {
            let geom = TreeGeometry::new(*q, *radius)?;
            let u = match (weight, weight_csv, preset) {
                (Some(w), None, None) => WeightSpec::closed_form(geom, w.parse()?, *p)?,
                (None, Some(path), None) => read_weight(geom, path, *p)?,
                (None, None, Some(pr)) => WeightSpec::closed_form(geom, pr.form(), *p)?,
                _ => return Err(Error::domain("give exactly one of --weight, --weight-csv, --preset")),
            };
            let x: Vertex = x.parse()?;
            let need = |name: &str, v: Option<f64>| v.ok_or_else(|| Error::domain(format!("{condition:?} needs --{name}")));
            let verdict = match condition {
                ConditionName::Thm1I => check_thm1_i(&u, need("alpha", *alpha)?, &x)?,
                ConditionName::Thm2I => check_thm2_i(&u, need("nu", *nu)?, &x)?,
                ConditionName::Thm3G => check_thm3_g(&u, need("R", *r)?, &x)?,
            };
            let mut json = serde_json::to_vec_pretty(&verdict)?;
            json.push(b'\n');
            emit(out.as_deref(), &json)?;
        }
        Command::Verify { suite, check, q, out, csv_dir } => {
            let config = VerifyConfig { q: *q, spec, ..VerifyConfig::default() };
            let reports = match (suite, check) {
                (Some(Suite::All), None) | (None, None) => run_suite(&config)?,
                (None, Some(id)) => vec![run_check(id, &config)?],
                _ => return Err(Error::domain(format!("give --suite all or --check ID ({})", CHECK_IDS.join(", ")))),
            };
            for r in &reports {
                eprintln!("{:<28} {:>4} {:>9} ms", r.check_id, if r.passed { "pass" } else { "FAIL" }, r.runtime_ms);
            }
            if let Some(dir) = csv_dir {
                std::fs::create_dir_all(dir)?;
                for r in &reports {
                    write_atomic(&dir.join(format!("{}.csv", r.check_id)), r.details_csv()?.as_bytes())?;
                }
            }
            let mut json = serde_json::to_vec_pretty(&reports)?;
            json.push(b'\n');
            emit(out.as_deref(), &json)?;
            if reports.iter().any(|r| !r.passed) {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
        Command::Flow { q, t, radius, input, out } => {
            let geom = TreeGeometry::new(*q, *radius)?;
            let f = match input {
                Some(path) => read_function(geom, path)?,
                None => TreeFunction::delta(geom, Vertex::root())?,
            };
            let fs = FlowStructure::new(geom);
            let xs = geom.enumerate_ball();
            let vals = xs.iter().map(|x| crate::flow::flow_heat(&fs, &f, *t, x)).collect::<Result<Vec<_>>>()?;
            let rows = xs
                .iter()
                .zip(&vals)
                .map(|(x, v)| vec![x.to_string(), fs.level(x).to_string(), sci(fs.lambda(x)), sci(*v)]);
            emit(out.as_deref(), &csv_bytes(&["vertex", "level", "lambda", "value"], rows)?)?;
        }
    }
    Ok(EXIT_OK)
}

/// 17 significant digits.
fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(bytes)?;
            s.flush()?;
            Ok(())
        }
    }
}

/// Temp file in the target directory, then rename: readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// `(row, key, value)`; rows are numbered from 1 after the header.
type Pairs = Vec<(usize, String, f64)>;

/// Two-column CSV with a header; returns the first header name and the rows.
fn read_pairs(path: &Path) -> Result<(String, Pairs)> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_path(path)?;
    let key = r.headers()?.get(0).unwrap_or("").to_string();
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!("row {row}: expected 2 fields, got {}", rec.len())));
        }
        let v: f64 = rec[1].parse().map_err(|_| Error::Parse(format!("row {row}: bad value {:?}", &rec[1])))?;
        out.push((row, rec[0].to_string(), v));
    }
    Ok((key, out))
}

fn parse_vertex_in(geom: TreeGeometry, row: usize, s: &str) -> Result<Vertex> {
    let v: Vertex = s.parse().map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
    geom.check_vertex(&v).map_err(|_| Error::domain(format!("row {row}: unknown vertex {s} on the ball of radius {} for q={}", geom.radius(), geom.q())))?;
    Ok(v)
}

fn read_function(geom: TreeGeometry, path: &Path) -> Result<TreeFunction> {
    let (_, rows) = read_pairs(path)?;
    let mut map = BTreeMap::new();
    for (row, key, v) in rows {
        let x = parse_vertex_in(geom, row, &key)?;
        if map.insert(x, v).is_some() {
            return Err(Error::Parse(format!("row {row}: duplicate vertex {key}")));
        }
    }
    TreeFunction::explicit(geom, map)
}

fn read_weight(geom: TreeGeometry, path: &Path, p: f64) -> Result<WeightSpec> {
    let (key, rows) = read_pairs(path)?;
    if key == "k" {
        let mut values = vec![f64::NAN; rows.len()];
        for (row, k, v) in rows {
            let k: usize = k.parse().map_err(|_| Error::Parse(format!("row {row}: bad distance {k:?}")))?;
            *values.get_mut(k).ok_or_else(|| Error::Parse(format!("row {row}: distances must be 0..n-1")))? = v;
        }
        WeightSpec::radial(geom, values, p)
    } else {
        let mut map = BTreeMap::new();
        for (row, key, v) in rows {
            map.insert(parse_vertex_in(geom, row, &key)?, v);
        }
        WeightSpec::explicit(geom, map, p)
    }
}
