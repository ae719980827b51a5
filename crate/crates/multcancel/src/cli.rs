//! Command-line front end.  A run is described by a config file plus
//! overriding flags (flag names mirror config keys exactly); every
//! command writes deterministic reports into the output directory and
//! exits with 0 (verdict pass), 1 (verdict fail), 2 (configuration
//! error) or 3 (numerical failure).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::atoms::{
    default_battery, derivative_atom, normalize, omega_atom, verify_moments, AtomBattery,
    SmoothAtom,
};
use crate::config::{parse_battery_text, parse_config_text, BatterySpec, Command, RunConfig};
use crate::error::{Error, Result};
use crate::grid::{make_grid, sample, Grid, SampledField};
use crate::io::{
    fmt_float, read_atom, read_field_binary, read_field_csv, write_atom, write_field_binary,
    write_field_csv,
};
use crate::multiplier::{apply, MultiplierPlan};
use crate::report::{
    cancellation_csv, cancellation_section, decay_csv, decay_section, equivalence_csv,
    equivalence_section, fmt_bool, fmt_complex, moment_csv, moment_section, plot_data,
    weakconv_csv, weakconv_plot, weakconv_section, Doc,
};
use crate::symbols::checks::{check_cancellation, estimate_decay};
use crate::symbols::sampler::{sample_shells, SamplerSpec};
use crate::util::multiindices;
use crate::verify::{
    equivalence_harness, holder_exponents, hp_quasinorm, identity_check, maximal, MaximalSpec, MomentReport, QuadSpec,
};

mod suite;

/// Verifies multiplier cancellation against vanishing moments of the
/// operator output.
#[derive(Parser, Debug)]
#[command(name = "multcancel", version, disable_help_subcommand = true)]
struct Cli {
    /// Path to a sectioned key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Command to run.
    #[arg(long)]
    command: Option<String>,
    /// Builtin symbol name.
    #[arg(long)]
    symbol: Option<String>,
    /// Symbol given in the expression grammar.
    #[arg(long = "symbol-expr")]
    symbol_expr: Option<String>,
    /// Lattice as n,L,M.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated Lebesgue exponents, one per block.
    #[arg(long)]
    p: Option<String>,
    /// Sampler seed.
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Atom battery: 'default' or a battery file path.
    #[arg(long)]
    battery: Option<String>,
    /// Block count for arity-generic symbols.
    #[arg(long)]
    blocks: Option<String>,
    /// Maximum derivative order for the checkers.
    #[arg(long)]
    order: Option<String>,
    /// Operator algorithm: naive or fft-last-block.
    #[arg(long)]
    algorithm: Option<String>,
    /// Singular-tube width in frequency-spacing units.
    #[arg(long = "delta-factor")]
    delta_factor: Option<String>,
    /// Derivative multiindex for atom-make.
    #[arg(long = "atom-beta")]
    atom_beta: Option<String>,
    /// Atom center for atom-make.
    #[arg(long = "atom-center")]
    atom_center: Option<String>,
    /// Atom radius for atom-make.
    #[arg(long = "atom-radius")]
    atom_radius: Option<String>,
    /// Build the spectral atom of this vanishing order instead.
    #[arg(long = "omega-order")]
    omega_order: Option<String>,
    /// Oscillation frequencies for weakconv.
    #[arg(long = "k-list")]
    k_list: Option<String>,
    /// Serialized atom to verify.
    #[arg(long = "atom-file")]
    atom_file: Option<String>,
    /// Comma-separated serialized input fields for apply/maximal.
    #[arg(long = "input-fields")]
    input_fields: Option<String>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) => 2,
        _ => 3,
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MULTCANCEL_THREADS") {
        let k: usize = v.parse().map_err(|_| {
            Error::Config(format!("MULTCANCEL_THREADS: bad thread count '{v}'"))
        })?;
        if k == 0 {
            return Err(Error::Config("MULTCANCEL_THREADS: must be positive".into()));
        }
        // ignore "already initialized": results do not depend on the
        // pool size, only wall time does
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    Ok(())
}

pub fn cli_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    match resolve(cli).and_then(|cfg| run(&cfg)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Merges the config file with flag overrides into a validated run.
fn resolve(cli: Cli) -> Result<RunConfig> {
    let mut map = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("key 'config': cannot read {}: {e}", path.display()))
            })?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    let overrides: [(&str, &Option<String>); 18] = [
        ("command", &cli.command),
        ("symbol", &cli.symbol),
        ("symbol-expr", &cli.symbol_expr),
        ("grid", &cli.grid),
        ("p", &cli.p),
        ("seed", &cli.seed),
        ("out", &cli.out),
        ("battery", &cli.battery),
        ("blocks", &cli.blocks),
        ("order", &cli.order),
        ("algorithm", &cli.algorithm),
        ("delta-factor", &cli.delta_factor),
        ("atom-beta", &cli.atom_beta),
        ("atom-center", &cli.atom_center),
        ("atom-radius", &cli.atom_radius),
        ("omega-order", &cli.omega_order),
        ("k-list", &cli.k_list),
        ("atom-file", &cli.atom_file),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            map.insert(key.to_string(), v.clone());
        }
    }
    if let Some(v) = &cli.input_fields {
        map.insert("input-fields".to_string(), v.clone());
    }
    RunConfig::from_map(map)
}

/// Output-directory writer; the directory is created on first write.
struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    fn new(dir: &Path) -> OutDir {
        OutDir { dir: dir.to_path_buf() }
    }

    fn write(&self, name: &str, contents: &[u8]) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        fs::write(self.dir.join(name), contents)?;
        Ok(())
    }
}

/// Starts a report document carrying the fully resolved config.
fn base_doc(kind: &str, cfg: &RunConfig) -> Doc {
    let mut doc = Doc::new(kind);
    doc.open("config");
    for (k, v) in &cfg.resolved {
        // the output location does not affect any result; skipping it
        // keeps reports byte-identical across output directories
        if k != "out" {
            doc.kv(k, v);
        }
    }
    doc.close();
    doc
}

fn grid_section(doc: &mut Doc, grid: Grid) {
    doc.open("grid");
    doc.kv("dim", &grid.dim().to_string());
    doc.kv("half_extent", &fmt_float(grid.half_extent()));
    doc.kv("points_per_axis", &grid.points_per_axis().to_string());
    doc.kv("spacing", &fmt_float(grid.spacing()));
    doc.close();
}

/// Per-command lattice defaults; explicit `grid` always wins.
fn resolve_grid(cfg: &RunConfig, block_dim: usize) -> Result<Grid> {
    if let Some((n, l, m)) = cfg.grid {
        if n != block_dim {
            return Err(Error::Config(format!(
                "key 'grid': dimension {n} does not match the symbol's block dimension {block_dim}"
            )));
        }
        return make_grid(n, l, m).map_err(|e| Error::Config(format!("key 'grid': {e}")));
    }
    let (l, m) = match (cfg.command, block_dim) {
        (Command::AtomMake | Command::AtomVerify, 1) => (4.0, 1024),
        (Command::AtomMake | Command::AtomVerify, _) => (3.0, 256),
        (Command::Identity | Command::Equivalence, 1) => (8.0, 1024),
        (Command::Identity | Command::Equivalence, _) => (3.0, 64),
        (Command::Weakconv, _) => (4.0, 512),
        (_, 1) => (8.0, 256),
        (_, _) => (3.0, 64),
    };
    make_grid(block_dim, l, m)
}

fn block_dim_hint(cfg: &RunConfig) -> usize {
    cfg.grid.map(|(n, _, _)| n).unwrap_or(2)
}

fn resolve_battery(cfg: &RunConfig, m: usize, n: usize, cap: u32) -> Result<AtomBattery> {
    match &cfg.battery {
        BatterySpec::Default => default_battery(m, n, cap, &cfg.p),
        BatterySpec::Path(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("key 'battery': cannot read {}: {e}", path.display()))
            })?;
            let battery = parse_battery_text(&text, &cfg.p)?;
            if battery.tuples[0].len() != m || battery.tuples[0][0].dim != n {
                return Err(Error::Config(format!(
                    "key 'battery': file atoms have arity {}x{}, the symbol needs {m}x{n}",
                    battery.tuples[0].len(),
                    battery.tuples[0][0].dim
                )));
            }
            Ok(battery)
        }
    }
}

fn read_field_file(path: &Path) -> Result<SampledField> {
    let bytes = fs::read(path).map_err(|e| {
        Error::Config(format!(
            "key 'input-fields': cannot read {}: {e}",
            path.display()
        ))
    })?;
    if bytes.starts_with(b"MCF1") {
        read_field_binary(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| Error::Parse(format!("{}: not valid UTF-8", path.display())))?;
        read_field_csv(text)
    }
}

/// Values along the first axis through the center of the lattice, as
/// two-column plot data.
fn axis_slice(f: &SampledField) -> String {
    let g = f.grid;
    let m = g.points_per_axis();
    let mut idx = vec![m / 2; g.dim()];
    let mut x = vec![0.0; g.dim()];
    let mut pairs = Vec::with_capacity(m);
    for k in 0..m {
        idx[0] = k;
        let flat = g.encode(&idx);
        g.phys_point(flat, &mut x);
        pairs.push((x[0], f.values[flat].norm()));
    }
    plot_data(&pairs)
}

fn run(cfg: &RunConfig) -> Result<bool> {
    let out = OutDir::new(&cfg.out);
    match cfg.command {
        Command::SymbolEval => cmd_symbol_eval(cfg, &out),
        Command::CancelCheck => cmd_cancel_check(cfg, &out),
        Command::DecayCheck => cmd_decay_check(cfg, &out),
        Command::AtomMake => cmd_atom_make(cfg, &out),
        Command::AtomVerify => cmd_atom_verify(cfg, &out),
        Command::Apply => cmd_apply(cfg, &out),
        Command::Identity => cmd_identity(cfg, &out),
        Command::Equivalence => cmd_equivalence(cfg, &out),
        Command::Maximal => cmd_maximal(cfg, &out),
        Command::Weakconv => cmd_weakconv(cfg, &out),
        Command::Suite => suite::cmd_suite(cfg, &out),
    }
}

fn cmd_symbol_eval(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let sym = cfg.make_symbol(block_dim_hint(cfg))?;
    let sampler = SamplerSpec::with_seed(cfg.seed);
    let points = sample_shells(&sampler, &sym)?;
    let mut per_shell: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    let mut shell_order: Vec<(f64, String)> = Vec::new();
    for (r, point) in &points {
        let v = sym.evaluate(point)?;
        if !v.is_finite() {
            return Err(Error::NonFinite { point: point.clone() });
        }
        let key = fmt_float(*r);
        let entry = per_shell.entry(key.clone()).or_insert_with(|| {
            shell_order.push((*r, key.clone()));
            (f64::INFINITY, f64::NEG_INFINITY, 0)
        });
        entry.0 = entry.0.min(v.abs());
        entry.1 = entry.1.max(v.abs());
        entry.2 += 1;
    }
    let mut doc = base_doc("symbol-eval", cfg);
    doc.kv("blocks", &sym.arity.blocks.to_string());
    doc.kv("block_dim", &sym.arity.block_dim.to_string());
    doc.kv("samples", &points.len().to_string());
    doc.open("per_shell_abs");
    let mut csv = String::from("radius,min_abs,max_abs,samples\n");
    let mut plot = Vec::new();
    for (r, key) in &shell_order {
        let (lo, hi, count) = per_shell[key];
        doc.kv(key, &format!("{} {}", fmt_float(lo), fmt_float(hi)));
        csv.push_str(&format!("{key},{},{},{count}\n", fmt_float(lo), fmt_float(hi)));
        plot.push((*r, hi));
    }
    doc.close();
    doc.kv("verdict", "pass");
    out.write("symbol-eval.report.txt", doc.finish().as_bytes())?;
    out.write("symbol-eval.csv", csv.as_bytes())?;
    out.write("symbol-eval.plot.dat", plot_data(&plot).as_bytes())?;
    println!("symbol-eval pass ({} samples)", points.len());
    Ok(true)
}

fn cmd_cancel_check(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let sym = cfg.make_symbol(block_dim_hint(cfg))?;
    let sampler = SamplerSpec::with_seed(cfg.seed);
    let rep = check_cancellation(&sym, cfg.order, &sampler, sym.arity.blocks - 1)?;
    let mut doc = base_doc("cancel-check", cfg);
    cancellation_section(&mut doc, &rep);
    doc.kv("verdict", fmt_bool(rep.verdict));
    out.write("cancel-check.report.txt", doc.finish().as_bytes())?;
    out.write("cancel-check.csv", cancellation_csv(&rep).as_bytes())?;
    println!(
        "cancel-check {} (order {}, {} samples)",
        fmt_bool(rep.verdict),
        cfg.order,
        rep.samples.len()
    );
    Ok(rep.verdict)
}

fn cmd_decay_check(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let sym = cfg.make_symbol(block_dim_hint(cfg))?;
    let sampler = SamplerSpec::with_seed(cfg.seed);
    let rep = estimate_decay(&sym, cfg.order, &sampler)?;
    let mut doc = base_doc("decay-check", cfg);
    decay_section(&mut doc, &rep);
    doc.kv("verdict", fmt_bool(rep.cm_consistent));
    out.write("decay-check.report.txt", doc.finish().as_bytes())?;
    out.write("decay-check.csv", decay_csv(&rep).as_bytes())?;
    // worst per-shell profile across derivative tuples
    let mut plot = Vec::new();
    for (i, r) in rep.sample_domain.iter().enumerate() {
        let worst = rep
            .per_shell_cm
            .values()
            .map(|v| v[i])
            .fold(0.0f64, f64::max);
        plot.push((*r, worst));
    }
    out.write("decay-check.plot.dat", plot_data(&plot).as_bytes())?;
    println!("decay-check {}", fmt_bool(rep.cm_consistent));
    Ok(rep.cm_consistent)
}

fn make_atom(cfg: &RunConfig, grid: Grid) -> Result<SmoothAtom> {
    if let Some(order) = cfg.omega_order {
        return omega_atom(order, grid.dim(), grid);
    }
    if cfg.atom_beta.is_empty() {
        return Err(Error::Config(
            "key 'atom-beta' (or 'omega-order') is required for atom-make".into(),
        ));
    }
    let center = if cfg.atom_center.is_empty() {
        vec![0.0; cfg.atom_beta.len()]
    } else {
        cfg.atom_center.clone()
    };
    if center.len() != cfg.atom_beta.len() {
        return Err(Error::Config(
            "key 'atom-center': dimension does not match 'atom-beta'".into(),
        ));
    }
    derivative_atom(&cfg.atom_beta, &center, cfg.atom_radius)
}

fn cmd_atom_make(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let dim = if cfg.omega_order.is_some() {
        cfg.grid.map(|(n, _, _)| n).unwrap_or(1)
    } else {
        cfg.atom_beta.len().max(1)
    };
    let grid = resolve_grid(cfg, dim)?;
    let atom = make_atom(cfg, grid)?;
    let worst = verify_moments(&atom, atom.vanishing_order, grid)?;
    let pass = worst <= atom.moment_tol();

    let mut buf = Vec::new();
    write_atom(&atom, grid, &mut buf)?;
    out.write("atom.txt", &buf)?;

    let mut doc = base_doc("atom-make", cfg);
    grid_section(&mut doc, grid);
    doc.open("atom");
    doc.kv("dim", &atom.dim.to_string());
    doc.kv("vanishing_order", &atom.vanishing_order.to_string());
    doc.kv("support_side", &fmt_float(atom.support_side));
    doc.kv("sup_bound", &fmt_float(atom.sup_bound));
    doc.kv("worst_normalized_moment", &fmt_float(worst));
    doc.kv("moment_tolerance", &fmt_float(atom.moment_tol()));
    doc.close();
    doc.kv("verdict", fmt_bool(pass));
    out.write("atom-make.report.txt", doc.finish().as_bytes())?;
    println!(
        "atom-make {} (worst normalized moment {:.3e})",
        fmt_bool(pass),
        worst
    );
    Ok(pass)
}

fn cmd_atom_verify(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let path = cfg
        .atom_file
        .as_ref()
        .ok_or_else(|| Error::Config("key 'atom-file' is required for atom-verify".into()))?;
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("key 'atom-file': cannot read {}: {e}", path.display()))
    })?;
    let atom = read_atom(&text)?;
    let grid = match &atom.kind {
        crate::atoms::AtomKind::Sampled { field, .. } => field.grid,
        crate::atoms::AtomKind::Closed { .. } => resolve_grid(cfg, atom.dim)?,
    };
    let worst = verify_moments(&atom, atom.vanishing_order, grid)?;
    let pass = worst <= atom.moment_tol();
    let mut doc = base_doc("atom-verify", cfg);
    grid_section(&mut doc, grid);
    doc.open("atom");
    doc.kv("dim", &atom.dim.to_string());
    doc.kv("vanishing_order", &atom.vanishing_order.to_string());
    doc.kv("worst_normalized_moment", &fmt_float(worst));
    doc.kv("moment_tolerance", &fmt_float(atom.moment_tol()));
    doc.close();
    doc.kv("verdict", fmt_bool(pass));
    out.write("atom-verify.report.txt", doc.finish().as_bytes())?;
    println!(
        "atom-verify {} (worst normalized moment {:.3e})",
        fmt_bool(pass),
        worst
    );
    Ok(pass)
}

/// Default inputs for apply: the first default-battery tuple,
/// normalized per slot.
fn default_inputs(cfg: &RunConfig, m: usize, grid: Grid) -> Result<Vec<SampledField>> {
    if cfg.p.len() != m {
        return Err(Error::Config(format!(
            "key 'p': {} exponents for a {m}-block symbol",
            cfg.p.len()
        )));
    }
    let (_, cap) = holder_exponents(&cfg.p, grid.dim())
        .map_err(|e| Error::Config(format!("key 'p': {e}")))?;
    let battery = default_battery(m, grid.dim(), cap, &cfg.p)?;
    battery.tuples[0]
        .iter()
        .zip(&cfg.p)
        .map(|(a, &pj)| normalize(a, pj.min(1.0), grid)?.sample_on(grid))
        .collect()
}

fn cmd_apply(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let sym = cfg.make_symbol(block_dim_hint(cfg))?;
    let m = sym.arity.blocks;
    let grid = resolve_grid(cfg, sym.arity.block_dim)?;
    let fields = if cfg.input_fields.is_empty() {
        default_inputs(cfg, m, grid)?
    } else {
        if cfg.input_fields.len() != m {
            return Err(Error::Config(format!(
                "key 'input-fields': {} paths for a {m}-block symbol",
                cfg.input_fields.len()
            )));
        }
        let fields = cfg
            .input_fields
            .iter()
            .map(|p| read_field_file(p))
            .collect::<Result<Vec<SampledField>>>()?;
        for f in &fields {
            if f.grid != grid {
                return Err(Error::Config(
                    "key 'input-fields': field lattice does not match 'grid'".into(),
                ));
            }
        }
        fields
    };
    let plan = MultiplierPlan::new(sym, grid, cfg.algorithm)?;
    let result = apply(&plan, &fields)?;

    let mut csv = Vec::new();
    write_field_csv(&result, &mut csv)?;
    out.write("apply.field.csv", &csv)?;
    let mut bin = Vec::new();
    write_field_binary(&result, &mut bin)?;
    out.write("apply.field.bin", &bin)?;
    out.write("apply.plot.dat", axis_slice(&result).as_bytes())?;

    let mut doc = base_doc("apply", cfg);
    grid_section(&mut doc, grid);
    doc.kv("sup_abs", &fmt_float(result.max_abs()));
    doc.kv("l1_norm", &fmt_float(result.l1_norm()));
    doc.kv("verdict", "pass");
    out.write("apply.report.txt", doc.finish().as_bytes())?;
    println!("apply pass (sup |T| = {:.3e})", result.max_abs());
    Ok(true)
}

fn identity_alphas(n: usize, cap: u32) -> Vec<Vec<u32>> {
    multiindices(n, cap)
}

fn cmd_identity(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let sym = cfg.make_symbol(block_dim_hint(cfg))?;
    let m = sym.arity.blocks;
    let n = sym.arity.block_dim;
    let grid = resolve_grid(cfg, n)?;
    if cfg.p.len() != m {
        return Err(Error::Config(format!(
            "key 'p': {} exponents for a {m}-block symbol",
            cfg.p.len()
        )));
    }
    let (_, cap) = holder_exponents(&cfg.p, n).map_err(|e| Error::Config(format!("key 'p': {e}")))?;
    let battery = resolve_battery(cfg, m, n, cap)?;
    let quad = QuadSpec {
        delta_factor: cfg.delta_factor,
    };
    let mut reports: Vec<MomentReport> = Vec::new();
    let mut all_pass = true;
    let mut doc = base_doc("identity", cfg);
    grid_section(&mut doc, grid);
    for (t, tuple) in battery.tuples.iter().enumerate() {
        doc.open(&format!("tuple_{t}"));
        for alpha in identity_alphas(n, cap) {
            let rep = identity_check(&sym, tuple, &alpha, grid, cfg.algorithm, quad, &cfg.p)?;
            all_pass &= rep.pass;
            moment_section(&mut doc, &rep);
            reports.push(rep);
        }
        doc.close();
    }
    doc.kv("verdict", fmt_bool(all_pass));
    out.write("identity.report.txt", doc.finish().as_bytes())?;
    out.write("identity.csv", moment_csv(&reports).as_bytes())?;
    println!(
        "identity {} ({} comparisons, worst rel_err {:.3e})",
        fmt_bool(all_pass),
        reports.len(),
        reports.iter().map(|r| r.rel_err).fold(0.0f64, f64::max)
    );
    Ok(all_pass)
}

fn cmd_equivalence(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let sym = cfg.make_symbol(block_dim_hint(cfg))?;
    let m = sym.arity.blocks;
    let n = sym.arity.block_dim;
    let grid = resolve_grid(cfg, n)?;
    if cfg.p.len() != m {
        return Err(Error::Config(format!(
            "key 'p': {} exponents for a {m}-block symbol",
            cfg.p.len()
        )));
    }
    let (_, cap) = holder_exponents(&cfg.p, n).map_err(|e| Error::Config(format!("key 'p': {e}")))?;
    let battery = resolve_battery(cfg, m, n, cap)?;
    let sampler = SamplerSpec::with_seed(cfg.seed);
    let symbol_id = cfg
        .symbol
        .clone()
        .unwrap_or_else(|| "symbol-expr".to_string());
    let rep = equivalence_harness(&sym, &symbol_id, &battery, &sampler, grid, cfg.algorithm)?;
    let mut doc = base_doc("equivalence", cfg);
    grid_section(&mut doc, grid);
    equivalence_section(&mut doc, &rep);
    doc.kv("verdict", fmt_bool(rep.agree));
    out.write("equivalence.report.txt", doc.finish().as_bytes())?;
    out.write("equivalence.csv", equivalence_csv(&rep).as_bytes())?;
    println!(
        "equivalence {} (cancellation {}, moments {})",
        fmt_bool(rep.agree),
        fmt_bool(rep.cancellation.verdict),
        fmt_bool(rep.all_moments_pass)
    );
    Ok(rep.agree)
}

fn cmd_maximal(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let (field, grid) = if let Some(path) = cfg.input_fields.first() {
        let f = read_field_file(path)?;
        (f.clone(), f.grid)
    } else {
        let n = cfg.grid.map(|(n, _, _)| n).unwrap_or(1);
        let grid = resolve_grid(cfg, n)?;
        let b = crate::atoms::bump(&vec![0.0; n], 1.0);
        (sample(|x| b.eval(x), grid)?, grid)
    };
    let spec = MaximalSpec::for_grid(grid);
    let mf = maximal(&field, &spec, grid)?;
    let inv: f64 = cfg.p.iter().map(|pj| 1.0 / pj).sum();
    if !(inv > 0.0) || !inv.is_finite() {
        return Err(Error::Config("key 'p': exponents must be positive".into()));
    }
    let p_use = (1.0 / inv).min(1.0);
    let q = hp_quasinorm(&field, p_use, &spec, grid)?;

    let mut csv = Vec::new();
    write_field_csv(&mf, &mut csv)?;
    out.write("maximal.field.csv", &csv)?;
    out.write("maximal.plot.dat", axis_slice(&mf).as_bytes())?;

    let mut doc = base_doc("maximal", cfg);
    grid_section(&mut doc, grid);
    doc.kv("scales", &spec.scales.len().to_string());
    doc.kv("p", &fmt_float(p_use));
    doc.kv("hp_quasinorm", &fmt_float(q));
    doc.kv("sup_maximal", &fmt_float(mf.max_abs()));
    doc.kv("verdict", "pass");
    out.write("maximal.report.txt", doc.finish().as_bytes())?;
    println!("maximal pass (H^p quasinorm {q:.6e} at p = {p_use})");
    Ok(true)
}

fn cmd_weakconv(cfg: &RunConfig, out: &OutDir) -> Result<bool> {
    let sym = cfg.make_symbol(1)?;
    if sym.arity.blocks != 2 || sym.arity.block_dim != 1 {
        return Err(Error::Config(
            "weakconv needs a bilinear symbol with block dimension 1".into(),
        ));
    }
    let grid = resolve_grid(cfg, 1)?;
    let b = |c: f64, r: f64| {
        let bmp = crate::atoms::bump(&[c], r);
        sample(move |x| bmp.eval(x), grid)
    };
    let f = b(0.0, 1.0)?;
    let g = b(0.2, 1.0)?;
    let h_env = b(0.0, 1.5)?;
    let e_env = b(-0.1, 1.5)?;
    let phi = b(0.0, 2.0)?;
    let rep = crate::verify::weakconv_demo(
        &sym,
        &f,
        &h_env,
        &g,
        &e_env,
        &phi,
        &cfg.k_list,
        grid,
        cfg.algorithm,
    )?;
    let mut doc = base_doc("weakconv", cfg);
    grid_section(&mut doc, grid);
    weakconv_section(&mut doc, &rep);
    doc.kv("verdict", "pass");
    out.write("weakconv.report.txt", doc.finish().as_bytes())?;
    out.write("weakconv.csv", weakconv_csv(&rep).as_bytes())?;
    out.write("weakconv.plot.dat", weakconv_plot(&rep).as_bytes())?;
    println!(
        "weakconv pass (limit {}, final gap {:.3e})",
        fmt_complex(rep.limit),
        rep.gaps.last().copied().unwrap_or(0.0)
    );
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_slice_is_two_columns() {
        let g = make_grid(1, 2.0, 8).unwrap();
        let f = sample(|x| x[0], g).unwrap();
        let s = axis_slice(&f);
        assert_eq!(s.lines().count(), 8);
        assert!(s.lines().all(|l| l.split(' ').count() == 2));
    }
}
