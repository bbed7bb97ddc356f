use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DesignPlan, FidelityPair};
use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::problems::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Real,
    Synthetic,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Real => "real",
            Provenance::Synthetic => "synthetic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub theta: Vec<f64>,
    pub q_lf: f64,
    pub q_hf: Option<f64>,
    /// Origin of `q_hf`; `None` exactly when `q_hf` is absent.
    pub provenance: Option<Provenance>,
}

impl Record {
    pub fn is_real(&self) -> bool {
        self.provenance == Some(Provenance::Real)
    }
}

/// Design points with their model outputs. `domain` is the box the inputs were
/// drawn from; `normalized` says whether `theta` has been mapped to `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub domain: Domain,
    pub normalized: bool,
    pub records: Vec<Record>,
}

/// Mean wall time per call observed while assembling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AssemblyCosts {
    pub lf_calls: usize,
    pub hf_calls: usize,
    pub mean_lf_s: f64,
    pub mean_hf_s: f64,
}

fn timed(f: impl FnOnce() -> Result<f64>) -> Result<(f64, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64()))
}

/// Low fidelity on every design point, high fidelity on `Theta_I` only.
/// Records are `Theta_I` followed by `Theta_II`, each in plan order.
pub fn assemble(pair: &mut FidelityPair, plan: &DesignPlan) -> Result<(Dataset, AssemblyCosts)> {
    let p: &FidelityPair = pair;
    let first: Vec<(Record, f64, f64)> = plan
        .theta_i
        .par_iter()
        .map(|th| {
            let (q_lf, t_lf) = timed(|| p.lf(th))?;
            let (q_hf, t_hf) = timed(|| p.hf(th))?;
            Ok((
                Record {
                    theta: th.clone(),
                    q_lf,
                    q_hf: Some(q_hf),
                    provenance: Some(Provenance::Real),
                },
                t_lf,
                t_hf,
            ))
        })
        .collect::<Result<_>>()?;
    let second: Vec<(Record, f64)> = plan
        .theta_ii
        .par_iter()
        .map(|th| {
            let (q_lf, t_lf) = timed(|| p.lf(th))?;
            Ok((
                Record {
                    theta: th.clone(),
                    q_lf,
                    q_hf: None,
                    provenance: None,
                },
                t_lf,
            ))
        })
        .collect::<Result<_>>()?;

    let lf_calls = plan.n();
    let hf_calls = plan.n_i();
    let lf_total: f64 = first.iter().map(|r| r.1).sum::<f64>() + second.iter().map(|r| r.1).sum::<f64>();
    let hf_total: f64 = first.iter().map(|r| r.2).sum();
    let costs = AssemblyCosts {
        lf_calls,
        hf_calls,
        mean_lf_s: if lf_calls > 0 { lf_total / lf_calls as f64 } else { 0.0 },
        mean_hf_s: if hf_calls > 0 { hf_total / hf_calls as f64 } else { 0.0 },
    };
    pair.cost_lf_s = costs.mean_lf_s;
    if hf_calls > 0 {
        pair.cost_hf_s = costs.mean_hf_s;
    }
    let records = first
        .into_iter()
        .map(|r| r.0)
        .chain(second.into_iter().map(|r| r.0))
        .collect();
    Ok((
        Dataset {
            domain: pair.domain.clone(),
            normalized: false,
            records,
        },
        costs,
    ))
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn real(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| r.is_real())
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.records.iter().filter(|r| r.provenance == Some(provenance)).count()
    }

    /// Keep only records with real high-fidelity values.
    pub fn real_subset(&self) -> Dataset {
        Dataset {
            domain: self.domain.clone(),
            normalized: self.normalized,
            records: self.real().cloned().collect(),
        }
    }

    /// Inputs mapped affinely into `[0, 1]^d`; targets untouched.
    pub fn normalize(&self) -> Result<Dataset> {
        if self.normalized {
            return Err(Error::arg("dataset is already normalized"));
        }
        self.domain.validate()?;
        Ok(self.map_theta(true, |t| self.domain.to_unit(t)))
    }

    pub fn denormalize(&self) -> Result<Dataset> {
        if !self.normalized {
            return Err(Error::arg("dataset is not normalized"));
        }
        self.domain.validate()?;
        Ok(self.map_theta(false, |z| self.domain.from_unit(z)))
    }

    fn map_theta(&self, normalized: bool, f: impl Fn(&[f64]) -> Vec<f64>) -> Dataset {
        Dataset {
            domain: self.domain.clone(),
            normalized,
            records: self
                .records
                .iter()
                .map(|r| Record {
                    theta: f(&r.theta),
                    ..r.clone()
                })
                .collect(),
        }
    }

    /// CSV with header `theta_0,..,theta_{d-1},q_lf,q_hf,provenance`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header: Vec<String> = (0..self.dim()).map(|k| format!("theta_{k}")).collect();
        header.extend(["q_lf", "q_hf", "provenance"].map(String::from));
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut row: Vec<String> = r.theta.iter().map(|v| format_f64(*v)).collect();
            row.push(format_f64(r.q_lf));
            row.push(r.q_hf.map(format_f64).unwrap_or_default());
            row.push(r.provenance.map(|p| p.as_str().to_string()).unwrap_or_default());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read records written by [`Dataset::write_csv`]; `domain` and the
    /// normalization flag are not stored in the file.
    pub fn read_csv(path: &Path, domain: Domain, normalized: bool) -> Result<Dataset> {
        let ctx = path.display().to_string();
        let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = rd.headers().map_err(csv_err)?.clone();
        let d = domain.dim();
        let expected: Vec<String> = (0..d)
            .map(|k| format!("theta_{k}"))
            .chain(["q_lf", "q_hf", "provenance"].map(String::from))
            .collect();
        if header.iter().collect::<Vec<_>>() != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::parse(&ctx, format!("unexpected header {:?}", header)));
        }
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::parse(format!("{ctx}, line {line}"), format!("{s:?}: {e}")))
        };
        let mut records = Vec::new();
        for (i, row) in rd.records().enumerate() {
            let row = row.map_err(csv_err)?;
            let line = i + 2;
            let theta = (0..d).map(|k| num(&row[k], line)).collect::<Result<Vec<_>>>()?;
            let q_lf = num(&row[d], line)?;
            let q_hf = if row[d + 1].is_empty() { None } else { Some(num(&row[d + 1], line)?) };
            let provenance = match &row[d + 2] {
                "" => None,
                "real" => Some(Provenance::Real),
                "synthetic" => Some(Provenance::Synthetic),
                other => return Err(Error::parse(format!("{ctx}, line {line}"), format!("bad provenance {other:?}"))),
            };
            if q_hf.is_some() != provenance.is_some() {
                return Err(Error::parse(
                    format!("{ctx}, line {line}"),
                    "q_hf and provenance must be both present or both empty",
                ));
            }
            records.push(Record {
                theta,
                q_lf,
                q_hf,
                provenance,
            });
        }
        Ok(Dataset {
            domain,
            normalized,
            records,
        })
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::parse("csv", format!("{other:?}")),
        }
    } else {
        Error::parse("csv", e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::{build_design, DesignRule};
    use crate::problems::ProblemId;
    use rand::Rng as _;

    fn ivp_dataset() -> Dataset {
        let mut pair = FidelityPair::ivp(0.1, 0.5).unwrap();
        let plan = build_design(&pair.domain.clone(), &DesignRule::grid_stride(241, 10)).unwrap();
        assemble(&mut pair, &plan).unwrap().0
    }

    #[test]
    fn assemble_counts() {
        let ds = ivp_dataset();
        assert_eq!(ds.len(), 241);
        assert_eq!(ds.count(Provenance::Real), 25);
        assert_eq!(ds.records.iter().filter(|r| r.q_hf.is_none()).count(), 216);
    }

    #[test]
    fn real_targets_are_model_outputs() {
        let ds = ivp_dataset();
        let pair = FidelityPair::ivp(0.1, 0.5).unwrap();
        for r in ds.real() {
            assert_eq!(r.q_hf.unwrap().to_bits(), pair.hf(&r.theta).unwrap().to_bits());
        }
    }

    #[test]
    fn assemble_is_deterministic() {
        assert_eq!(ivp_dataset(), ivp_dataset());
    }

    #[test]
    fn empty_second_set_means_all_targets() {
        let mut pair = FidelityPair::pulsed();
        let plan = build_design(
            &pair.domain.clone(),
            &DesignRule::UniformRandom {
                n: 30,
                stride: 1,
                seed: 2,
            },
        )
        .unwrap();
        let (ds, costs) = assemble(&mut pair, &plan).unwrap();
        assert!(ds.records.iter().all(|r| r.q_hf.is_some()));
        assert_eq!(costs.hf_calls, 30);
    }

    #[test]
    fn normalization_round_trip() {
        let domain = ProblemId::PulsedOscillator.domain();
        let mut rng = crate::rng::stream(5, 5);
        let records: Vec<Record> = (0..100_000)
            .map(|_| Record {
                theta: (0..4)
                    .map(|k| domain.lower[k] + rng.random::<f64>() * (domain.upper[k] - domain.lower[k]))
                    .collect(),
                q_lf: 0.0,
                q_hf: None,
                provenance: None,
            })
            .collect();
        let ds = Dataset {
            domain,
            normalized: false,
            records,
        };
        let back = ds.normalize().unwrap().denormalize().unwrap();
        let worst = ds
            .records
            .iter()
            .zip(&back.records)
            .flat_map(|(a, b)| a.theta.iter().zip(&b.theta).map(|(x, y)| ((x - y) / x.abs().max(1.0)).abs()))
            .fold(0.0, f64::max);
        assert!(worst < 1e-15, "{worst}");
    }

    #[test]
    fn degenerate_domain_cannot_normalize() {
        let ds = Dataset {
            domain: Domain {
                lower: vec![1.0],
                upper: vec![1.0],
            },
            normalized: false,
            records: vec![],
        };
        assert!(ds.normalize().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = ivp_dataset();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        ds.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("theta_0,q_lf,q_hf,provenance\n"));
        let back = Dataset::read_csv(&path, ds.domain.clone(), false).unwrap();
        assert_eq!(back, ds);
    }
}
