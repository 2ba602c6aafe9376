use std::path::Path;

use arakelov_core::HomogeneousLift;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Map file contents. `P` and `Q` list the coefficients of `x^i y^(d-i)`
/// from `i = d` down to `i = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub d: usize,
    #[serde(rename = "P")]
    pub p: Vec<Coefficient>,
    #[serde(rename = "Q")]
    pub q: Vec<Coefficient>,
}

/// Coefficients are decimal strings; plain JSON integers are accepted too.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Text(String),
    Int(i64),
}

impl Coefficient {
    fn to_bigint(&self) -> Result<BigInt, CliError> {
        match self {
            Coefficient::Int(n) => Ok(BigInt::from(*n)),
            Coefficient::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad coefficient {s:?}"))),
        }
    }
}

impl MapFile {
    pub fn into_lift(self) -> Result<HomogeneousLift, CliError> {
        if self.p.len() != self.d + 1 || self.q.len() != self.d + 1 {
            return Err(CliError::Usage(format!(
                "a degree {} map needs {} coefficients in P and in Q",
                self.d,
                self.d + 1
            )));
        }
        let p = self.p.iter().map(Coefficient::to_bigint).collect::<Result<_, _>>()?;
        let q = self.q.iter().map(Coefficient::to_bigint).collect::<Result<_, _>>()?;
        Ok(HomogeneousLift::from_descending(p, q)?)
    }

    pub fn from_lift(f: &HomogeneousLift) -> MapFile {
        let desc = |c: &[BigInt]| c.iter().rev().map(|a| Coefficient::Text(a.to_string())).collect();
        MapFile { d: f.degree(), p: desc(f.p().coeffs()), q: desc(f.q().coeffs()) }
    }
}

pub fn read_map(path: &Path) -> Result<HomogeneousLift, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mf: MapFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    mf.into_lift()
}

/// SHA-256 of the canonical lift's coefficient list.
pub fn map_hash(f: &HomogeneousLift) -> String {
    hex::encode(Sha256::digest(f.normalized().coefficient_key().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_descending_coefficients() {
        let mf: MapFile = serde_json::from_str(r#"{"d":2,"P":["1","0","-1"],"Q":["0","0",1]}"#).unwrap();
        let f = mf.into_lift().unwrap();
        assert_eq!(f, HomogeneousLift::from_i64(&[-1, 0, 1], &[1, 0, 0]).unwrap());
        let back = serde_json::to_string(&MapFile::from_lift(&f)).unwrap();
        assert_eq!(back, r#"{"d":2,"P":["1","0","-1"],"Q":["0","0","1"]}"#);
    }

    #[test]
    fn rejects_bad_files() {
        let mf: MapFile = serde_json::from_str(r#"{"d":2,"P":["1","0"],"Q":["0","0","1"]}"#).unwrap();
        assert!(mf.into_lift().is_err());
        let mf: MapFile = serde_json::from_str(r#"{"d":2,"P":["1","0","0"],"Q":["1","0","0"]}"#).unwrap();
        assert!(matches!(mf.into_lift(), Err(CliError::Core(_))));
        let mf: MapFile = serde_json::from_str(r#"{"d":2,"P":["x","0","0"],"Q":["0","0","1"]}"#).unwrap();
        assert!(mf.into_lift().is_err());
    }

    #[test]
    fn hash_ignores_lift_scaling() {
        let f = HomogeneousLift::from_i64(&[0, 0, 1], &[1, 0, 0]).unwrap();
        let g = HomogeneousLift::from_i64(&[0, 0, -3], &[-3, 0, 0]).unwrap();
        assert_eq!(map_hash(&f), map_hash(&g));
        assert_eq!(map_hash(&f).len(), 64);
    }
}
