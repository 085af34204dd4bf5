use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::report::StudyReport;
use super::series::NormSeries;
use crate::crystal::{curvature, reconstruct_interface, Background};
use crate::error::{Error, Result};
use crate::spectral::hilbert;
use crate::trajectory::{Abort, Trajectory};

pub const NORMS_FILE: &str = "norms.csv";
pub const RUN_FILE: &str = "run.json";
pub const FIELD_HEADER: &str = "xi,u,hu,kappa,x,y";

/// Writes floats with 17 significant digits; non-finite values become `null`.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Study(format!("serialising report: {e}")))?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn csv_line(out: &mut impl Write, values: &[f64]) -> io::Result<()> {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.write_all(b",")?;
        }
        write!(out, "{v:.16e}")?;
    }
    out.write_all(b"\n")
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct Grid {
    n: usize,
    length: f64,
}

#[derive(Serialize)]
struct Outcome<'a> {
    name: &'a str,
    pass: bool,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    config: &'a str,
    grid: Grid,
    scheme: Option<&'a str>,
    passed: bool,
    outcomes: Vec<Outcome<'a>>,
    report: &'a StudyReport,
    abort: Option<&'a Abort>,
    samples: usize,
    wall_time_s: f64,
}

/// What a run leaves behind.
pub struct RunArtifacts<'a> {
    /// Exact config text the run was started from.
    pub config_text: &'a str,
    pub background: &'a Background,
    pub trajectory: Option<&'a Trajectory>,
    pub report: &'a StudyReport,
    pub wall_time_s: f64,
}

/// Write `norms.csv` and `field_<i>.csv` (when there is a trajectory) and
/// `run.json` into `out_dir`, creating it if needed. Returns the paths written.
pub fn emit_outputs(a: &RunArtifacts<'_>, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    if let Some(traj) = a.trajectory {
        let series = NormSeries::from_trajectory(traj);
        let path = out_dir.join(NORMS_FILE);
        write_file(&path, |w| {
            writeln!(w, "{}", NormSeries::HEADER)?;
            (0..series.len()).try_for_each(|i| csv_line(w, &series.row(i)))
        })?;
        written.push(path);

        for (i, u) in traj.fields.iter().enumerate() {
            let hu = hilbert(u);
            let kappa = curvature(u, a.background)?;
            let curve = reconstruct_interface(u, a.background)?;
            let nodes = u.grid().nodes();
            let path = out_dir.join(format!("field_{i}.csv"));
            write_file(&path, |w| {
                writeln!(w, "{FIELD_HEADER}")?;
                (0..nodes.len()).try_for_each(|j| {
                    csv_line(
                        w,
                        &[
                            nodes[j],
                            u.samples()[j],
                            hu.samples()[j],
                            kappa.samples()[j],
                            curve.x[j],
                            curve.y[j],
                        ],
                    )
                })
            })?;
            written.push(path);
        }
    }

    let env = a.report.environment.as_ref();
    let g = a.background.grid();
    let record = RunRecord {
        config: a.config_text,
        grid: Grid {
            n: g.n(),
            length: g.length(),
        },
        scheme: env.map(|e| e.scheme.as_str()),
        passed: a.report.passed() && a.trajectory.is_none_or(|t| t.completed()),
        outcomes: a
            .report
            .checks
            .iter()
            .map(|c| Outcome {
                name: &c.name,
                pass: c.pass,
            })
            .collect(),
        report: a.report,
        abort: a.trajectory.and_then(|t| t.abort.as_ref()),
        samples: a.trajectory.map_or(0, Trajectory::len),
        wall_time_s: a.wall_time_s,
    };
    let json = to_json(&record)?;
    let path = out_dir.join(RUN_FILE);
    write_file(&path, |w| w.write_all(json.as_bytes()).and_then(|_| w.write_all(b"\n")))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::PhysicsParams;
    use crate::evolution::{evolve, EvolveConfig};
    use crate::spectral::{RealField, SobolevIndex, SpectralGrid};

    fn artifacts_for<'a>(traj: &'a Trajectory, bg: &'a Background, report: &'a StudyReport) -> RunArtifacts<'a> {
        RunArtifacts {
            config_text: "n = 32\n",
            background: bg,
            trajectory: Some(traj),
            report,
            wall_time_s: 0.0,
        }
    }

    #[test]
    fn zero_run_files() {
        let g = SpectralGrid::new(32, 40.0).unwrap();
        let bg = Background::flat(&g);
        let p = PhysicsParams::new(1.0, 0.0, 0.0).unwrap();
        let cfg = EvolveConfig::new(p, bg.clone(), SobolevIndex::new(5.0).unwrap(), 1e-3, 0.01).with_output_stride(5);
        let traj = evolve(&RealField::zeros(&g), &cfg).unwrap();
        let report = StudyReport::new("simulate", "zero", None);
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("nested/run");
        let files = emit_outputs(&artifacts_for(&traj, &bg, &report), &out).unwrap();
        assert_eq!(files.len(), 1 + traj.len() + 1);
        let norms = fs::read_to_string(out.join(NORMS_FILE)).unwrap();
        let mut lines = norms.lines();
        assert_eq!(lines.next().unwrap(), "t,l2,hs_half,dxs2_l2,smooth_cum,b_min,ledger_res");
        for line in lines {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols.len(), 7);
            assert!(cols[1..5].iter().all(|&c| c == 0.0));
            assert!(cols[6] == 0.0);
        }
        let field = fs::read_to_string(out.join("field_0.csv")).unwrap();
        assert_eq!(field.lines().next().unwrap(), FIELD_HEADER);
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join(RUN_FILE)).unwrap()).unwrap();
        assert_eq!(json["config"], "n = 32\n");
        assert_eq!(json["grid"]["n"], 32);
        assert_eq!(json["passed"], true);
    }

    #[test]
    fn ivantsov_snapshot_is_the_parabola() {
        let g = SpectralGrid::new(128, 40.0).unwrap();
        let bg = Background::ivantsov(&g, 0.6).unwrap();
        let mut traj = Trajectory::new(SobolevIndex::new(5.0).unwrap());
        traj.push(0.0, RealField::zeros(&g), 1.0, 0, 0.0);
        let report = StudyReport::new("simulate", "ivantsov", None);
        let dir = tempfile::tempdir().unwrap();
        emit_outputs(&artifacts_for(&traj, &bg, &report), dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("field_0.csv")).unwrap();
        let half = bg.inner_half_width();
        let mut seen = 0;
        for line in text.lines().skip(1) {
            let c: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            if c[0].abs() <= half {
                assert!((c[4] - c[0]).abs() < 1e-9, "{line}");
                assert!((c[5] + 0.5 * c[0] * c[0]).abs() < 1e-9, "{line}");
                seen += 1;
            }
        }
        assert!(seen > 10);
    }

    #[test]
    fn json_floats_have_full_precision() {
        let s = to_json(&vec![0.1, f64::NAN, 2.5e300]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,null,2.5000000000000001e300]");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Some(0.1), None, Some(2.5e300)]);
    }

    #[test]
    fn unwritable_path_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let g = SpectralGrid::new(16, 40.0).unwrap();
        let bg = Background::flat(&g);
        let report = StudyReport::new("verify", "", None);
        let a = RunArtifacts {
            config_text: "",
            background: &bg,
            trajectory: None,
            report: &report,
            wall_time_s: 0.0,
        };
        let err = emit_outputs(&a, &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
