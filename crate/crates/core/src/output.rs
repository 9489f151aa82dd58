//! CSV and JSON emission.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::grid::Field;
use crate::harness::{SweepResult, TableResult};
use crate::observables::ObservableSeries;
use crate::regularization::Regularization;

pub const SERIES_HEADER: &str = "t,mass,energy_reg,energy_exact";
pub const SERIES_ERROR_HEADER: &str = "err_l2,err_h1,err_linf,err_density_l1";
pub const SWEEP_HEADER: &str =
    "param_name,param_value,err_l2,err_h1,err_linf,err_density_l1,energy_err,fitted_order";
pub const REGFUN_HEADER: &str = "rho,F,f,fprime,fsecond";

/// Shortest round-trip decimal; scientific for `|x| < 1e-3` or `|x| >= 1e6`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x.abs() < 1e-3 || x.abs() >= 1e6 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn line(w: &mut impl Write, cells: &[String]) -> Result<()> {
    writeln!(w, "{}", cells.join(","))?;
    Ok(())
}

pub fn series_header(with_errors: bool) -> String {
    if with_errors {
        format!("{SERIES_HEADER},{SERIES_ERROR_HEADER}")
    } else {
        SERIES_HEADER.to_string()
    }
}

/// Writes a recorded series. Energy cells are empty when energies were not recorded.
pub fn write_series(path: &Path, s: &ObservableSeries) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", series_header(s.errors.is_some()))?;
    for i in 0..s.len() {
        let mut cells = vec![
            fmt_num(s.times[i]),
            fmt_num(s.mass[i]),
            fmt_opt(s.energy_reg.get(i).copied()),
            fmt_opt(s.energy_exact.get(i).copied()),
        ];
        if let Some(errs) = &s.errors {
            let e = errs[i];
            cells.extend([e.l2, e.h1, e.linf, e.density_l1].map(fmt_num));
        }
        line(&mut w, &cells)?;
    }
    w.flush()?;
    Ok(())
}

pub fn state_header(dim: usize) -> &'static str {
    if dim == 1 {
        "i,x,re,im,density"
    } else {
        "i,j,x,y,re,im,density"
    }
}

/// Writes grid indices, coordinates and values of a field.
pub fn write_state(path: &Path, f: &Field) -> Result<()> {
    let mut w = create(path)?;
    let d = f.domain();
    writeln!(w, "{}", state_header(d.dim()))?;
    for (flat, v) in f.values().iter().enumerate() {
        let idx = d.unravel(flat);
        let x = d.position(flat);
        let mut cells: Vec<String> = idx[..d.dim()].iter().map(|i| i.to_string()).collect();
        cells.extend(x[..d.dim()].iter().map(|&c| fmt_num(c)));
        cells.extend([v.re, v.im, v.norm_sqr()].map(fmt_num));
        line(&mut w, &cells)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(path: &Path, r: &SweepResult) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{SWEEP_HEADER}")?;
    for (i, p) in r.params.iter().enumerate() {
        let e = r.errors[i];
        let mut cells = vec![r.param_name.clone(), fmt_num(*p)];
        cells.extend([e.l2, e.h1, e.linf, e.density_l1, r.energy_errors[i]].map(fmt_num));
        cells.push(fmt_opt(r.fitted_order));
        line(&mut w, &cells)?;
    }
    w.flush()?;
    Ok(())
}

/// Header of `table.csv`: `eps`, one error column per tau, then the rate
/// columns (`rate@tau_j` for `j >= 1`).
pub fn table_header(taus: &[f64]) -> String {
    let mut cells = vec!["eps".to_string()];
    cells.extend(taus.iter().map(|t| format!("err@{}", fmt_num(*t))));
    cells.extend(taus.iter().skip(1).map(|t| format!("rate@{}", fmt_num(*t))));
    cells.join(",")
}

pub fn write_table(path: &Path, t: &TableResult) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", table_header(&t.taus))?;
    for (i, eps) in t.epsilons.iter().enumerate() {
        let mut cells = vec![fmt_num(*eps)];
        cells.extend(t.errors[i].iter().map(|e| fmt_num(*e)));
        cells.extend(t.rates[i].iter().skip(1).map(|r| fmt_opt(*r)));
        line(&mut w, &cells)?;
    }
    w.flush()?;
    Ok(())
}

/// `samples` densities evenly spaced over `[0, rho_max]`, endpoints included.
pub fn regfun_grid(rho_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![rho_max],
        m => (0..m)
            .map(|i| rho_max * i as f64 / (m - 1) as f64)
            .collect(),
    }
}

/// Rows `(rho, F, f, f', f'')`; undefined values become `-inf`/`inf`.
pub fn regfun_rows(reg: &Regularization, rhos: &[f64]) -> Vec<[f64; 5]> {
    rhos.iter()
        .map(|&rho| {
            [
                rho,
                reg.big_f_unchecked(rho),
                reg.f_unchecked(rho),
                reg.f_prime(rho).unwrap_or(f64::INFINITY),
                reg.f_second(rho).unwrap_or(f64::NEG_INFINITY),
            ]
        })
        .collect()
}

pub fn write_regfun(path: &Path, rows: &[[f64; 5]]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{REGFUN_HEADER}")?;
    for r in rows {
        line(&mut w, &r.map(fmt_num))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
