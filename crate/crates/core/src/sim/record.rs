use std::io::Write;

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::{Error, Result};

/// Replicas of one batch, in replica order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub base_seed: u64,
    pub records: Vec<RunRecord>,
}

/// Mean and standard error of one observable over the uncensored runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub mean: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub t: f64,
    pub z: Moment,
    pub l: Moment,
    pub m: Option<Moment>,
    pub y: Option<Moment>,
    pub z_exceed: Option<Moment>,
    pub surviving: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_runs: usize,
    pub censored: usize,
    pub base_seed: u64,
    pub checkpoints: Vec<CheckpointSummary>,
}

fn moment(xs: impl Iterator<Item = f64>) -> Option<Moment> {
    let xs: Vec<f64> = xs.collect();
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some(Moment { mean, std_err: (var / n).sqrt() })
}

impl Ensemble {
    pub fn new(base_seed: u64, records: Vec<RunRecord>) -> Self {
        Self { base_seed, records }
    }

    pub fn censored(&self) -> usize {
        self.records.iter().filter(|r| r.censored).count()
    }

    /// Runs that reached the horizon.
    pub fn complete(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(|r| !r.censored)
    }

    pub fn summary(&self) -> EnsembleSummary {
        let complete: Vec<&RunRecord> = self.complete().collect();
        let n_checkpoints = complete.first().map_or(0, |r| r.checkpoints.len());
        let checkpoints = (0..n_checkpoints)
            .map(|k| {
                let at = |r: &&RunRecord| r.checkpoints[k];
                let zero = Moment { mean: 0.0, std_err: 0.0 };
                CheckpointSummary {
                    t: at(&complete[0]).t,
                    z: moment(complete.iter().map(|r| at(r).z as f64)).unwrap_or(zero),
                    l: moment(complete.iter().map(|r| at(r).l)).unwrap_or(zero),
                    m: moment(complete.iter().filter_map(|r| at(r).m)),
                    y: moment(complete.iter().filter_map(|r| at(r).y)),
                    z_exceed: moment(complete.iter().filter_map(|r| at(r).z_exceed.map(|z| z as f64))),
                    surviving: complete.iter().filter(|r| at(r).z > 0).count(),
                }
            })
            .collect();
        EnsembleSummary {
            n_runs: self.records.len(),
            censored: self.censored(),
            base_seed: self.base_seed,
            checkpoints,
        }
    }

    /// One row per recorded checkpoint. Missing values are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "run_id,seed,t,Z,L,M,Y,Z_exceed,survived")?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.records {
            let survived = match r.survived {
                Some(true) => "1",
                Some(false) => "0",
                None => "censored",
            };
            if r.checkpoints.is_empty() {
                writeln!(out, "{},{},,,,,,,{}", r.run_id, r.seed, survived)?;
            }
            for c in &r.checkpoints {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.run_id,
                    r.seed,
                    c.t,
                    c.z,
                    c.l,
                    opt(c.m),
                    opt(c.y),
                    c.z_exceed.map(|z| z.to_string()).unwrap_or_default(),
                    survived
                )?;
            }
        }
        Ok(())
    }

    /// Parses the CSV written by [`Ensemble::write_csv`]; lines starting with
    /// `#` are skipped.
    pub fn read_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, what: &str| Error::Io(format!("runs table line {line}: {what}"));
        let mut records: Vec<RunRecord> = Vec::new();
        let mut base_seed = None;
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == "run_id,seed,t,Z,L,M,Y,Z_exceed,survived" => {}
            _ => return Err(Error::Io("runs table has no header".into())),
        }
        for (i, line) in lines {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(bad(i + 1, "expected 9 fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "bad number"));
            let run_id: u64 = f[0].parse().map_err(|_| bad(i + 1, "bad run_id"))?;
            let seed: u64 = f[1].parse().map_err(|_| bad(i + 1, "bad seed"))?;
            base_seed.get_or_insert(seed);
            let (survived, censored) = match f[8] {
                "1" => (Some(true), false),
                "0" => (Some(false), false),
                "censored" => (None, true),
                _ => return Err(bad(i + 1, "bad survived flag")),
            };
            let same_run = records.last().is_some_and(|r| r.run_id == run_id && r.seed == seed);
            if !same_run {
                records.push(RunRecord {
                    run_id,
                    seed,
                    config_hash: String::new(),
                    checkpoints: Vec::new(),
                    survived,
                    m_final: None,
                    censored,
                });
            }
            if f[2].is_empty() {
                continue;
            }
            let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            let cp = super::Checkpoint {
                t: num(f[2])?,
                z: f[3].parse().map_err(|_| bad(i + 1, "bad Z"))?,
                l: num(f[4])?,
                m: opt(f[5])?,
                y: opt(f[6])?,
                z_exceed: if f[7].is_empty() {
                    None
                } else {
                    Some(f[7].parse().map_err(|_| bad(i + 1, "bad Z_exceed"))?)
                },
            };
            records.last_mut().expect("pushed above").checkpoints.push(cp);
        }
        for r in &mut records {
            if !r.censored {
                r.m_final = r.checkpoints.last().and_then(|c| c.m);
            }
        }
        Ok(Self { base_seed: base_seed.unwrap_or(0), records })
    }
}
