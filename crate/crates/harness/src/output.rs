//! CSV writers. Floats use 17 significant digits; missing values are blank.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use lbm4::analysis::{StabilityFlag, StabilityReport};
use lbm4::ConservedField;

use crate::error::Result;
use crate::experiment::{ConvergenceReport, SeriesPoint};

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// `dx,n,err_<comp>,order_<comp>,...`
pub fn write_convergence<W: Write>(report: &ConvergenceReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["dx".to_string(), "n".to_string()];
    for c in &report.components {
        header.push(format!("err_{c}"));
        header.push(format!("order_{c}"));
    }
    w.write_record(&header)?;
    for row in &report.rows {
        let mut rec = vec![fmt(row.dx), row.n.to_string()];
        for (e, p) in row.errors.iter().zip(&row.orders) {
            rec.push(fmt_opt(*e));
            rec.push(fmt_opt(*p));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,norm_u,delta_sigma`
pub fn write_series<W: Write>(points: &[SeriesPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "norm_u", "delta_sigma"])?;
    for p in points {
        w.write_record([fmt(p.t), fmt(p.norm_u), fmt(p.delta_sigma)])?;
    }
    w.flush()?;
    Ok(())
}

/// `x[,y],comp0,...` at the lattice nodes.
pub fn write_field<W: Write>(field: &ConservedField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let lattice = field.lattice();
    let dim = lattice.dim();
    let mut header: Vec<String> = ["x", "y"][..dim].iter().map(|s| s.to_string()).collect();
    header.extend((0..field.components()).map(|c| format!("comp{c}")));
    w.write_record(&header)?;
    let mut site = vec![0.0; field.components()];
    for s in 0..lattice.n_sites() {
        let x = lattice.coordinates(s);
        field.site(s, &mut site);
        let rec: Vec<String> = x[..dim].iter().chain(site.iter()).map(|&v| fmt(v)).collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn flag_name(flag: StabilityFlag) -> &'static str {
    match flag {
        StabilityFlag::Stable => "stable",
        StabilityFlag::Marginal => "marginal",
        StabilityFlag::Exceptional => "exceptional",
        StabilityFlag::Unstable => "unstable",
    }
}

/// `a_over_V,xi_dx,trace_re,trace_im,det_abs,stable_flag`
pub fn write_scan<W: Write>(report: &StabilityReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a_over_V", "xi_dx", "trace_re", "trace_im", "det_abs", "stable_flag"])?;
    for r in &report.rows {
        w.write_record([
            fmt(r.a_over_v),
            fmt(r.xi_dx),
            fmt(r.trace.re),
            fmt(r.trace.im),
            fmt(r.det_abs),
            flag_name(r.flag).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Creates `path` and hands it to `write`.
pub fn to_file(path: &Path, write: impl FnOnce(File) -> Result<()>) -> Result<()> {
    write(File::create(path)?)
}
