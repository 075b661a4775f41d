use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use magdirac::classify::predict_regime_for;
use magdirac::quasimodes::{norm_bounds_check, QuasimodeParams};
use magdirac::radial::sector_tridiagonal;
use magdirac::zeromodes::{build_zero_mode, commutator_check, dstar_on_zero_mode, residual_d, thm2_bound_check};
use magdirac::{
    coercivity_ratio, eigs_in_window, lift_to_2d, predict_regime, probe_accumulation, probe_gap, residual_sequence,
    RadialFieldSpec, RadialGrid, SectorIndex, SectorRange, Variant,
};

use crate::output::{digest_hex, emit, num, RunInputs, Table};
use crate::{Cli, Command, GridArgs, ProbeArgs};

/// Bad input that is not a library error (exit code 2).
#[derive(Debug)]
pub struct UserError {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for UserError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.code, self.message)
    }
}

impl std::error::Error for UserError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UserError { code: "E_USAGE", message: message.into() }.into()
}

fn parse_sectors(text: &str) -> Result<(i64, i64)> {
    let (a, b) = text.split_once("..").ok_or_else(|| usage(format!("sectors must look like a..b, got `{text}`")))?;
    let a: i64 = a.trim().parse().map_err(|_| usage(format!("bad sector bound `{a}`")))?;
    let b: i64 = b.trim().parse().map_err(|_| usage(format!("bad sector bound `{b}`")))?;
    if a > b {
        return Err(usage(format!("empty sector range {a}..{b}")));
    }
    Ok((a, b))
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(usage(format!("{what} must look like x,y, got `{text}`")));
    }
    let p = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("bad number `{s}` in {what}")));
    Ok((p(parts[0])?, p(parts[1])?))
}

struct LoadedSpec {
    spec: RadialFieldSpec,
    digest: String,
}

fn load_spec(path: &Path) -> Result<LoadedSpec> {
    let bytes = std::fs::read(path).map_err(|e| UserError {
        code: "E_IO",
        message: format!("cannot read spec {}: {e}", path.display()),
    })?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| magdirac::Error::SpecParse("spec file is not UTF-8".into()))?;
    let spec = RadialFieldSpec::from_json(&text)?;
    Ok(LoadedSpec { spec, digest: digest_hex(&bytes) })
}

fn grid(args: &GridArgs, radius: f64, cells: usize) -> Result<RadialGrid> {
    Ok(RadialGrid::new(args.radius.unwrap_or(radius), args.cells.unwrap_or(cells))?)
}

fn sector_range(args: &ProbeArgs) -> Result<SectorRange> {
    Ok(match &args.sectors {
        Some(s) => {
            let (a, b) = parse_sectors(s)?;
            SectorRange::Fixed(a, b)
        }
        None => SectorRange::default(),
    })
}

fn probe_params(params: &mut BTreeMap<&'static str, String>, args: &ProbeArgs) {
    params.insert("radii", args.radii.iter().map(|&r| num(r)).collect::<Vec<_>>().join(";"));
    params.insert("energy", num(args.energy));
    params.insert("density", num(args.density));
    params.insert("sectors", args.sectors.clone().unwrap_or_else(|| "adaptive".into()));
}

fn grid_params(params: &mut BTreeMap<&'static str, String>, g: &RadialGrid) {
    params.insert("radius", num(g.radius));
    params.insert("cells", g.cells.to_string());
}

pub fn run(cli: &Cli) -> Result<()> {
    let start = Instant::now();
    let mut params = BTreeMap::new();
    let mut spec_path = None;
    let mut spec_digest = None;
    let mut load = |path: &Path| -> Result<RadialFieldSpec> {
        let loaded = load_spec(path)?;
        spec_path = Some(path.to_path_buf());
        spec_digest = Some(loaded.digest);
        Ok(loaded.spec)
    };

    let (subcommand, tables) = match &cli.command {
        Command::Classify { spec, probe, probe_args } => {
            let spec = load(spec)?;
            let regime = predict_regime_for(&spec)?;
            let mut line = format!("regime={} clause={}", regime.label, regime.clause);
            if let Some(k) = regime.k {
                line += &format!(" k={k}");
            }
            println!("{line}");
            let mut table = Table::new("classify", &["label", "item", "clause", "k"]);
            table.push(vec![
                regime.label.to_string(),
                regime.label.item().map(String::from).unwrap_or_default(),
                regime.clause.into(),
                regime.k.map(|k| k.to_string()).unwrap_or_default(),
            ]);
            let mut tables = vec![table];
            if *probe {
                probe_params(&mut params, probe_args);
                let report = probe_accumulation(
                    &spec,
                    probe_args.energy,
                    &probe_args.radii,
                    sector_range(probe_args)?,
                    probe_args.density,
                )?;
                println!("verdict={:?} slope={}", report.verdict, num(report.slope));
                let mut t = Table::new("accumulation", &["radius", "count", "zero_modes", "j_min", "j_max"]);
                for i in 0..report.radii.len() {
                    t.push(vec![
                        num(report.radii[i]),
                        report.counts[i].to_string(),
                        report.zero_modes[i].to_string(),
                        report.sector_span[i].0.to_string(),
                        report.sector_span[i].1.to_string(),
                    ]);
                }
                tables.push(t);
            }
            // The summary lines already went to stdout; tables only go to files.
            if cli.common.out.is_none() {
                return Ok(());
            }
            ("classify", tables)
        }
        Command::Spectrum { spec, grid: g, sectors, window, tol, gap } => {
            let spec = load(spec)?;
            let g = grid(g, 20.0, 4000)?;
            let (a, b) = parse_sectors(sectors)?;
            grid_params(&mut params, &g);
            params.insert("sectors", format!("{a}..{b}"));
            if *gap {
                let report = probe_gap(&spec, &[g.radius], g.cells as f64 / g.radius, (a, b))?;
                let mut t = Table::new("gap", &["radius", "half_gap", "lower_bound"]);
                t.push(vec![num(g.radius), num(report.half_gap), num(report.lower_bound)]);
                ("spectrum", vec![t])
            } else {
                let (lo, hi) = parse_pair(window, "window")?;
                params.insert("window", format!("{},{}", num(lo), num(hi)));
                params.insert("tol", num(*tol));
                let mut t = Table::new("spectrum", &["j", "index", "eigenvalue"]);
                for j in a..=b {
                    let m = sector_tridiagonal(&spec, &g, SectorIndex::new(j))?;
                    for (i, l) in eigs_in_window(&m, lo, hi, *tol)?.eigenvalues.iter().enumerate() {
                        t.push(vec![j.to_string(), i.to_string(), num(*l)]);
                    }
                }
                ("spectrum", vec![t])
            }
        }
        Command::Quasimode { ladder, .. } if !ladder.is_empty() => {
            let mut t = Table::new(
                "ladder",
                &["p", "B", "V", "cutoff_radius", "phi_sq", "phi_lower", "phi_upper", "psi_sq", "psi_lower", "tail", "pass"],
            );
            for item in ladder {
                let vals: Vec<&str> = item.split(',').map(str::trim).collect();
                let bad = || usage(format!("ladder must be p,B,V, got `{item}`"));
                if vals.len() != 3 {
                    return Err(bad());
                }
                let p: u32 = vals[0].parse().map_err(|_| bad())?;
                let b: f64 = vals[1].parse().map_err(|_| bad())?;
                let v: f64 = vals[2].parse().map_err(|_| bad())?;
                // Twice the radius where the ladder state peaks.
                let r = 2.0 * (2.0 * (p as f64 + 1.0) / b).sqrt();
                let nb = norm_bounds_check(b, v, p, r)?;
                t.push(vec![
                    p.to_string(),
                    num(b),
                    num(v),
                    num(r),
                    num(nb.phi_sq),
                    num(nb.phi_lower),
                    num(nb.phi_upper),
                    num(nb.psi_sq),
                    num(nb.psi_lower),
                    num(nb.tail),
                    nb.pass.to_string(),
                ]);
            }
            params.insert("ladder", ladder.join(";"));
            ("quasimode", vec![t])
        }
        Command::Quasimode { spec, variant, k, eps, count, centers, direction, .. } => {
            let spec = load(spec.as_deref().ok_or_else(|| usage("quasimode needs --spec"))?)?;
            let mut v = match variant.as_str() {
                "thm3a" => Variant::thm3a(*k),
                "thm3" => Variant::thm3(),
                other => return Err(usage(format!("unknown variant `{other}` (thm3a or thm3)"))),
            };
            if let Some(e) = eps {
                match &mut v {
                    Variant::Thm3a { eps, .. } | Variant::Thm3 { eps, .. } => *eps = *e,
                }
            }
            let (dx, dy) = parse_pair(direction, "direction")?;
            let len = dx.hypot(dy);
            if !(len > 0.0) {
                return Err(usage("direction must be non-zero"));
            }
            let dir = [dx / len, dy / len];
            let field = lift_to_2d(&spec);
            params.insert("variant", v.name().into());
            params.insert("eps", num(v.eps()));
            if let Variant::Thm3a { k, .. } = v {
                params.insert("k", k.to_string());
            }
            params.insert("direction", format!("{},{}", num(dir[0]), num(dir[1])));
            let qp = match centers {
                Some(dists) => {
                    params.insert("centers", dists.iter().map(|&d| num(d)).collect::<Vec<_>>().join(";"));
                    let points: Vec<[f64; 2]> = dists.iter().map(|&d| [d * dir[0], d * dir[1]]).collect();
                    QuasimodeParams::at_points(&field, v, &points)?
                }
                None => {
                    params.insert("count", count.to_string());
                    QuasimodeParams::on_ray(&field, dir, v, *count)?
                }
            };
            params.insert("cutoff", qp.cutoff.into());
            params.insert("degenerate", qp.degenerate.to_string());
            let qs = residual_sequence(&field, &qp)?;
            let mut t = Table::new(
                "quasimode",
                &[
                    "n", "x", "y", "p", "cutoff_radius", "B", "V", "T1", "T2", "T3", "T4", "ratio_sum",
                    "ratio_coherent", "ratio_fd", "ratio_fd_gauge", "norm_lb_margin", "gauge_gap", "level_mismatch",
                    "grad_b", "grad_v",
                ],
            );
            for q in &qs {
                let c = &q.center;
                let d = &q.diagnostics;
                t.push(vec![
                    c.n.to_string(),
                    num(c.x[0]),
                    num(c.x[1]),
                    c.p.to_string(),
                    num(c.radius),
                    num(c.b),
                    num(c.v),
                    num(q.terms[0]),
                    num(q.terms[1]),
                    num(q.terms[2]),
                    num(q.terms[3]),
                    num(q.ratio_sum),
                    num(q.ratio_coherent),
                    num(q.ratio_fd),
                    num(q.ratio_fd_gauge),
                    num(q.norm_lb_margin),
                    num(q.gauge_gap),
                    num(d.level_mismatch),
                    num(d.grad_b),
                    num(d.grad_v),
                ]);
            }
            ("quasimode", vec![t])
        }
        Command::Zeromode { spec, grid: g, max_degree, step, bound } => {
            let spec = load(spec)?;
            let g = grid(g, 20.0, 100)?;
            grid_params(&mut params, &g);
            params.insert("max_degree", max_degree.to_string());
            params.insert("step", num(*step));
            let mut t = Table::new(
                "zeromode",
                &["m", "ln_norm_sq", "mass_tail", "dstar_rel_err", "ddstar", "two_b", "residual_d", "fd_order"],
            );
            for m in 0..=*max_degree {
                let mode = build_zero_mode(&spec, m, &g)?;
                let dstar = dstar_on_zero_mode(&mode);
                let (lhs, rhs) = commutator_check(&mode);
                let r1 = residual_d(&mode, &spec, *step);
                let r2 = residual_d(&mode, &spec, 0.5 * step);
                t.push(vec![
                    m.to_string(),
                    num(mode.ln_norm_sq),
                    num(mode.mass_tail),
                    num(dstar.rel_err),
                    num(lhs),
                    num(rhs),
                    num(r1),
                    num((r1 / r2).log2()),
                ]);
            }
            let mut tables = vec![t];
            if *bound {
                let degrees: Vec<u32> = (0..=*max_degree).collect();
                let report = thm2_bound_check(&spec, &degrees, &g)?;
                let mut b = Table::new(
                    "bound",
                    &["m", "ratio", "bound", "grad_term", "mismatch_term", "psi_over_omega", "psi_lower_bound"],
                );
                for row in &report.rows {
                    b.push(vec![
                        row.m.to_string(),
                        num(row.ratio),
                        num(row.bound),
                        num(report.grad_term),
                        num(report.mismatch_term),
                        num(row.psi_over_omega),
                        num(row.psi_lower_bound),
                    ]);
                }
                tables.push(b);
            }
            ("zeromode", tables)
        }
        Command::Coercivity { spec, grid: g, sectors } => {
            let spec = load(spec)?;
            let g = grid(g, 20.0, 800)?;
            let (a, b) = parse_sectors(sectors)?;
            grid_params(&mut params, &g);
            params.insert("sectors", format!("{a}..{b}"));
            let mut t = Table::new("coercivity", &["j", "ratio"]);
            for j in a..=b {
                t.push(vec![j.to_string(), num(coercivity_ratio(&spec, &g, SectorIndex::new(j))?)]);
            }
            ("coercivity", vec![t])
        }
        Command::Sweep { v0, b0, t, s, points, probe, probe_args } => {
            let mut lattice = Vec::new();
            if points.is_empty() {
                if t.is_empty() || s.is_empty() {
                    return Err(usage("sweep needs --t and --s lists, or --point"));
                }
                params.insert("V0", num(*v0));
                params.insert("B0", num(*b0));
                for &ti in t {
                    for &si in s {
                        lattice.push((*v0, *b0, ti, si));
                    }
                }
            } else {
                for p in points {
                    let vals: Vec<f64> = p
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| usage(format!("bad point `{p}`")))?;
                    if vals.len() != 4 {
                        return Err(usage(format!("point must be V0,B0,t,s, got `{p}`")));
                    }
                    lattice.push((vals[0], vals[1], vals[2], vals[3]));
                }
                params.insert("points", points.join(";"));
            }
            let mut cols = vec!["V0", "B0", "t", "s", "label", "item", "clause", "k"];
            if *probe {
                probe_params(&mut params, probe_args);
                cols.extend(["verdict", "slope", "counts"]);
            }
            let mut table = Table::new("sweep", &cols);
            for (v0, b0, ti, si) in lattice {
                let r = predict_regime(v0, b0, ti, si)?;
                let mut row = vec![
                    num(v0),
                    num(b0),
                    num(ti),
                    num(si),
                    r.label.to_string(),
                    r.label.item().map(String::from).unwrap_or_default(),
                    r.clause.into(),
                    r.k.map(|k| k.to_string()).unwrap_or_default(),
                ];
                if *probe {
                    let spec = RadialFieldSpec::power_law(v0, b0, ti, si)?;
                    let rep = probe_accumulation(
                        &spec,
                        probe_args.energy,
                        &probe_args.radii,
                        sector_range(probe_args)?,
                        probe_args.density,
                    )?;
                    row.push(format!("{:?}", rep.verdict));
                    row.push(num(rep.slope));
                    row.push(rep.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";"));
                }
                table.push(row);
            }
            ("sweep", vec![table])
        }
    };
    let inputs = RunInputs { subcommand, spec_path, spec_digest, params };
    emit(&inputs, &tables, cli.common.out.as_deref(), start.elapsed().as_secs_f64())
}
