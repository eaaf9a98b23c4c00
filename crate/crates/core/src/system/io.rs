//! CSV trajectories plus a TOML manifest per dataset.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::spec::SystemSpec;
use super::trajectory::{HiddenTruth, MultiTrajectoryDataset, Trajectory};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Renders with 17 significant digits so that `f64` values round-trip exactly.
pub fn fmt_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn parse_real(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
}

pub fn write_trajectory_csv<T: Real>(path: &Path, traj: &Trajectory<T>) -> Result<()> {
    traj.validate()?;
    let p = traj.x.first().map_or(0, |x| x.len());
    let m = traj.hidden.as_ref().map_or(0, |h| h.beta.first().map_or(0, |b| b.len()));
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((0..p).map(|i| format!("x_{i}")));
    header.push("y".into());
    if let Some(h) = &traj.hidden {
        header.extend((0..m).map(|i| format!("beta_{i}")));
        header.push("w".into());
        if h.eps.is_some() {
            header.push("eps".into());
        }
    }
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(&header)?;
    for t in 0..traj.len() {
        let mut row = vec![t.to_string()];
        row.extend(traj.x[t].iter().map(|v| fmt_real(v.to_f64_lossy())));
        row.push(fmt_real(traj.y[t].to_f64_lossy()));
        if let Some(h) = &traj.hidden {
            row.extend(h.beta[t].iter().map(|v| fmt_real(v.to_f64_lossy())));
            row.push(fmt_real(h.noise[t].to_f64_lossy()));
            if let Some(e) = &h.eps {
                row.push(fmt_real(e[t].to_f64_lossy()));
            }
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a trajectory CSV. A final `β_T` is not stored, so the last recorded
/// `β` is repeated to keep the hidden-truth shape.
pub fn read_trajectory_csv<T: Real>(path: &Path) -> Result<Trajectory<T>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.to_string()).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let xs: Vec<usize> = (0..).map_while(|i| col(&format!("x_{i}"))).collect();
    let betas: Vec<usize> = (0..).map_while(|i| col(&format!("beta_{i}"))).collect();
    let y_col = col("y").ok_or_else(|| Error::Parse(format!("{}: missing y column", path.display())))?;
    let w_col = col("w");
    let eps_col = col("eps");
    let mut traj = Trajectory { x: vec![], y: vec![], hidden: None };
    let (mut hb, mut hw, mut he) = (vec![], vec![], vec![]);
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| -> Result<T> { Ok(T::lit(parse_real(rec.get(i).unwrap_or(""))?)) };
        traj.x.push(xs.iter().map(|&i| get(i)).collect::<Result<Vec<T>>>()?);
        traj.y.push(get(y_col)?);
        if let Some(wc) = w_col {
            hb.push(betas.iter().map(|&i| get(i)).collect::<Result<Vec<T>>>()?);
            hw.push(get(wc)?);
            if let Some(ec) = eps_col {
                he.push(get(ec)?);
            }
        }
    }
    if w_col.is_some() {
        if let Some(last) = hb.last().cloned() {
            hb.push(last);
        }
        traj.hidden = Some(HiddenTruth { beta: hb, noise: hw, eps: eps_col.map(|_| he) });
    }
    Ok(traj)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: DeserializeOwned + Default"))]
pub struct Manifest<T> {
    pub spec_id: String,
    pub seed: u64,
    pub n1: usize,
    pub horizon: usize,
    pub files: Vec<String>,
    pub streams: Vec<u64>,
    pub spec: SystemSpec<T>,
}

/// Writes one CSV per trajectory plus `manifest.toml`; returns the manifest path.
pub fn save_dataset<T: Real + Serialize + DeserializeOwned>(dir: &Path, data: &MultiTrajectoryDataset<T>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut files = vec![];
    for (i, tr) in data.trajectories.iter().enumerate() {
        let name = format!("traj_{i:04}.csv");
        write_trajectory_csv(&dir.join(&name), tr)?;
        files.push(name);
    }
    let manifest = Manifest {
        spec_id: data.spec.id.clone(),
        seed: data.seed,
        n1: data.n1(),
        horizon: data.horizon(),
        files,
        streams: data.streams.clone(),
        spec: data.spec.clone(),
    };
    let path = dir.join("manifest.toml");
    fs::write(&path, toml::to_string(&manifest)?)?;
    Ok(path)
}

pub fn load_dataset<T: Real + Serialize + DeserializeOwned>(manifest_path: &Path) -> Result<MultiTrajectoryDataset<T>> {
    let text = fs::read_to_string(manifest_path)?;
    let m: Manifest<T> = toml::from_str(&text)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let trajectories = m
        .files
        .iter()
        .map(|f| read_trajectory_csv(&dir.join(f)))
        .collect::<Result<Vec<_>>>()?;
    if trajectories.len() != m.n1 {
        return Err(Error::Parse("manifest N1 disagrees with file list".into()));
    }
    Ok(MultiTrajectoryDataset { spec: m.spec, trajectories, seed: m.seed, streams: m.streams })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::*;

    #[test]
    fn dataset_round_trip_is_exact() {
        let spec = SystemSpec {
            id: "tanh".into(),
            family: ModelFamily::TanhNetwork { hidden: 1, inputs: 2 },
            alpha_star: vec![0.8, -0.6],
            parameter_box: CompactBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap(),
            beta: BetaSchedule::Constant { value: vec![1.0, 0.0] },
            regressors: RegressorDynamics::Autoregressive {
                y_lags: 1,
                u_lags: 1,
                feedback: 0.5,
                init: NoiseLaw::Gaussian { mean: 0.0, sd: 1.0 },
                input: NoiseLaw::Uniform { half_width: 1.0 },
            },
            noise: NoiseLaw::Uniform { half_width: 2.5 },
            bounds: SpecBounds { output_bound: Some(1.0), ..Default::default() },
        };
        let data = simulate_source(&spec, 2, 40, 77).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = save_dataset(dir.path(), &data).unwrap();
        let back: MultiTrajectoryDataset<f64> = load_dataset(&path).unwrap();
        assert_eq!(back.spec, data.spec);
        for (a, b) in back.trajectories.iter().zip(&data.trajectories) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
            assert_eq!(a.hidden.as_ref().unwrap().noise, b.hidden.as_ref().unwrap().noise);
        }
        let bytes1 = std::fs::read(dir.path().join("traj_0000.csv")).unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        save_dataset(dir2.path(), &simulate_source(&spec, 2, 40, 77).unwrap()).unwrap();
        let bytes2 = std::fs::read(dir2.path().join("traj_0000.csv")).unwrap();
        assert_eq!(bytes1, bytes2);
    }
}
