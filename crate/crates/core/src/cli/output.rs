//! CSV rendering and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::experiments::{ClosureReport, EquivalenceReport, SweepAxes, SweepResult};
use crate::statespace::{Atom, BasisLabel, Mode};

pub const TRAJECTORY_HEADER: &str = "t_g,P_phi1,P_phi2,P_phi3,P_phi4,P_phi5,P_ef,P_ffb,P_fe,P_ff,trace,fidelity";
pub const DURATION_HEADER: &str = "T_g,mode,fidelity";
pub const HEATMAP_HEADER: &str = "gamma_over_g,kappa_over_g,fidelity";
pub const CLOSURE_HEADER: &str = "generators,size,states";
pub const EQUIVALENCE_HEADER: &str = "check,parameter,value";
pub const SPECTRUM_HEADER: &str =
    "t_g,omega1,omega2,lambda_1,lambda_2,lambda_3,lambda_4,lambda_5,cdd_coupling,adiabaticity";

/// printf `%#.12g`: 12 significant digits, trailing zeros kept.
pub fn fmt_g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    const P: i32 = 12;
    if x == 0.0 {
        let sign = if x.is_sign_negative() { "-" } else { "" };
        return format!("{sign}0.{}", "0".repeat(P as usize - 1));
    }
    // Exponent after rounding to P significant digits.
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp) as usize;
        let mut s = format!("{x:.decimals$}");
        if decimals == 0 {
            s.push('.');
        }
        s
    }
}

fn label_code(l: &BasisLabel) -> String {
    format!(
        "{}{}{}{}",
        l.level(Atom::One).symbol(),
        l.level(Atom::Two).symbol(),
        l.photons(Mode::A),
        l.photons(Mode::B)
    )
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::with_capacity(traj.len() * 160);
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for (k, t) in traj.times.iter().enumerate() {
        s.push_str(&fmt_g12(*t));
        for p in traj.populations[k] {
            s.push(',');
            s.push_str(&fmt_g12(p));
        }
        s.push(',');
        s.push_str(&fmt_g12(traj.norm[k]));
        s.push(',');
        if let Some(f) = &traj.fidelity {
            s.push_str(&fmt_g12(f[k]));
        }
        s.push('\n');
    }
    s
}

fn fidelity_field(f: &std::result::Result<f64, String>) -> String {
    f.as_ref().map(|&v| fmt_g12(v)).unwrap_or_default()
}

pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut s = String::new();
    match &sweep.axes {
        SweepAxes::Duration { modes, t_values } => {
            s.push_str(DURATION_HEADER);
            s.push('\n');
            let n = t_values.len();
            for (m, mode) in modes.iter().enumerate() {
                for (k, t) in t_values.iter().enumerate() {
                    let _ = writeln!(s, "{},{},{}", fmt_g12(*t), mode, fidelity_field(&sweep.fidelity[m * n + k]));
                }
            }
        }
        SweepAxes::Decoherence { gammas, kappas } => {
            s.push_str(HEATMAP_HEADER);
            s.push('\n');
            let n = kappas.len();
            for (gi, g) in gammas.iter().enumerate() {
                for (ki, k) in kappas.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{},{},{}",
                        fmt_g12(*g),
                        fmt_g12(*k),
                        fidelity_field(&sweep.fidelity[gi * n + ki])
                    );
                }
            }
        }
    }
    s
}

pub fn closure_csv(report: &ClosureReport) -> String {
    let mut s = String::from(CLOSURE_HEADER);
    s.push('\n');
    for (name, set) in [
        ("h0", &report.reference),
        ("h0+aux", &report.with_aux),
        ("h0+aux+jumps", &report.with_jumps),
    ] {
        let states: Vec<String> = set.iter().map(label_code).collect();
        let _ = writeln!(s, "{name},{},{}", set.len(), states.join(" "));
    }
    s
}

pub fn equivalence_csv(report: &EquivalenceReport) -> String {
    let mut s = String::from(EQUIVALENCE_HEADER);
    s.push('\n');
    for p in &report.points {
        let _ = writeln!(s, "max_dp1,{},{}", fmt_g12(p.scale), fmt_g12(p.max_dp1));
        let _ = writeln!(s, "max_dp5,{},{}", fmt_g12(p.scale), fmt_g12(p.max_dp5));
    }
    for (omega0, gap) in &report.reconstruction {
        let _ = writeln!(s, "cdd_gap,{},{}", fmt_g12(*omega0), fmt_g12(*gap));
    }
    s
}

/// Sibling manifest path: `<out>.manifest`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

/// Comment header followed by `key = value` lines that `--config` accepts.
pub fn manifest_text(command: &str, hash: &str, out: &Path, resolved: &[(&str, String)], notes: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# command: {command}");
    let _ = writeln!(s, "# config-hash: {hash}");
    let _ = writeln!(s, "# output: {}", out.display());
    for n in notes {
        let _ = writeln!(s, "# {n}");
    }
    for (k, v) in resolved {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() && !dir.exists() {
            return Err(Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "parent directory does not exist"),
            ));
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_printf() {
        let cases = [
            (1.0, "1.00000000000"),
            (0.0, "0.00000000000"),
            (0.5, "0.500000000000"),
            (50.0, "50.0000000000"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (1e-5, "1.00000000000e-05"),
            (0.0001234, "0.000123400000000"),
            (-2.5e-17, "-2.50000000000e-17"),
            (123456789012.0, "123456789012."),
            (1234567890123.0, "1.23456789012e+12"),
            (0.99999999999951, "1.00000000000"),
            (9.9999999999951e-5, "0.000100000000000"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g12(x), want, "{x:e}");
        }
    }

    #[test]
    fn manifest_sibling() {
        assert_eq!(manifest_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.manifest"));
    }
}
