//! Sampled fields `q(x, t)` shared by the asymptotic evaluator and the
//! direct integrator.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const FIELD_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Oracle,
    Asymptotic,
}

impl Provenance {
    fn name(self) -> &'static str {
        match self {
            Provenance::Oracle => "oracle",
            Provenance::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionKind {
    /// `D_0`, between `4c²t + (β/c) log t` and the slowest soliton band.
    D0,
    /// `D_j`, between bands `j` and `j + 1` (`D_N` beyond the fastest).
    Between,
    /// `D_j^sol`, the band around `x = 4κ_j²t`.
    Soliton,
    /// Below the lower boundary of the domain.
    Outside,
}

impl RegionKind {
    pub fn name(self) -> &'static str {
        match self {
            RegionKind::D0 => "D0",
            RegionKind::Between => "D",
            RegionKind::Soliton => "Dsol",
            RegionKind::Outside => "outside",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "D0" => RegionKind::D0,
            "D" => RegionKind::Between,
            "Dsol" => RegionKind::Soliton,
            "outside" => RegionKind::Outside,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionTag {
    pub kind: RegionKind,
    pub index: usize,
}

/// `q` on a fixed `x` grid at a list of times; `q[i]` belongs to `t[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub provenance: Provenance,
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    /// Region tags, asymptotic fields only.
    pub tags: Option<Vec<Vec<RegionTag>>>,
}

impl FieldGrid {
    pub fn snapshot(&self, t: f64) -> Option<&[f64]> {
        self.t
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .map(|i| self.q[i].as_slice())
    }

    /// Long format, one row per `(t, x)`. The first line is a comment
    /// carrying schema version and provenance.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        use std::io::Write;
        let mut file = std::fs::File::create(path)?;
        writeln!(
            file,
            "# kdvlab-field schema_version={FIELD_SCHEMA_VERSION} provenance={}",
            self.provenance.name()
        )?;
        let mut w = csv::Writer::from_writer(file);
        match self.provenance {
            Provenance::Asymptotic => w.write_record(["x", "t", "q_sol", "region_kind", "region_index"])?,
            Provenance::Oracle => w.write_record(["x", "t", "q"])?,
        }
        for (it, &t) in self.t.iter().enumerate() {
            for (ix, &x) in self.x.iter().enumerate() {
                let mut row = vec![
                    format!("{x:.17e}"),
                    format!("{t:.17e}"),
                    format!("{:.17e}", self.q[it][ix]),
                ];
                if let Some(tags) = &self.tags {
                    let tag = tags[it][ix];
                    row.push(tag.kind.name().into());
                    row.push(tag.index.to_string());
                }
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let first = text.lines().next().unwrap_or("");
        let meta = |key: &str| {
            first
                .split_whitespace()
                .find_map(|tok| tok.strip_prefix(key).map(str::to_string))
        };
        let version = meta("schema_version=")
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or_else(|| Error::Schema {
                expected: FIELD_SCHEMA_VERSION,
                found: 0,
            })?;
        if version != FIELD_SCHEMA_VERSION {
            return Err(Error::Schema {
                expected: FIELD_SCHEMA_VERSION,
                found: version,
            });
        }
        let provenance = match meta("provenance=").as_deref() {
            Some("asymptotic") => Provenance::Asymptotic,
            _ => Provenance::Oracle,
        };
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut x: Vec<f64> = Vec::new();
        let mut t: Vec<f64> = Vec::new();
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut tags: Vec<Vec<RegionTag>> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Config(format!("bad field row {rec:?}")))
            };
            let (xv, tv, qv) = (num(0)?, num(1)?, num(2)?);
            if t.last() != Some(&tv) {
                if t.contains(&tv) {
                    return Err(Error::GridMismatch("times must be contiguous blocks".into()));
                }
                t.push(tv);
                q.push(Vec::new());
                tags.push(Vec::new());
            }
            let block = q.len() - 1;
            if block == 0 {
                x.push(xv);
            } else if x.get(q[block].len()) != Some(&xv) {
                return Err(Error::GridMismatch(format!("x grid differs at t = {tv}")));
            }
            q[block].push(qv);
            if provenance == Provenance::Asymptotic {
                let kind = rec
                    .get(3)
                    .and_then(RegionKind::parse)
                    .ok_or_else(|| Error::Config(format!("bad region tag in {rec:?}")))?;
                let index = rec.get(4).and_then(|s| s.parse().ok()).unwrap_or(0);
                tags[block].push(RegionTag { kind, index });
            }
        }
        if q.iter().any(|row| row.len() != x.len()) {
            return Err(Error::GridMismatch("ragged field".into()));
        }
        Ok(FieldGrid {
            provenance,
            x,
            t,
            q,
            tags: (provenance == Provenance::Asymptotic).then_some(tags),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = FieldGrid {
            provenance: Provenance::Asymptotic,
            x: vec![-1.0, 0.5, 2.0],
            t: vec![5.0, 10.0],
            q: vec![vec![0.1, -1.0 / 3.0, 1e-300], vec![0.0, -2.0, 3.5]],
            tags: Some(vec![
                vec![
                    RegionTag { kind: RegionKind::Outside, index: 0 },
                    RegionTag { kind: RegionKind::D0, index: 0 },
                    RegionTag { kind: RegionKind::Soliton, index: 1 },
                ];
                2
            ]),
        };
        let p = dir.path().join("f.csv");
        f.write_csv(&p).unwrap();
        assert_eq!(FieldGrid::read_csv(&p).unwrap(), f);
        let g = FieldGrid {
            provenance: Provenance::Oracle,
            tags: None,
            ..f
        };
        g.write_csv(&p).unwrap();
        assert_eq!(FieldGrid::read_csv(&p).unwrap(), g);
    }

    #[test]
    fn wrong_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, "# kdvlab-field schema_version=7 provenance=oracle\nx,t,q\n0,1,2\n").unwrap();
        assert!(matches!(
            FieldGrid::read_csv(&p),
            Err(Error::Schema { found: 7, .. })
        ));
    }
}
