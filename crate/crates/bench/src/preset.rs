use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smd_core::{Dims, ProblemId};

/// Problem size for a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DimPreset {
    Five,
    Ten,
    /// The 20-variable split is scaled up from the 10-variable one.
    Twenty,
    /// The same `(p, q, r, s)` for every problem.
    Custom(Dims),
}

impl DimPreset {
    pub fn dims(self, id: ProblemId) -> Dims {
        let smd6 = id == ProblemId::Smd6;
        match (self, smd6) {
            (DimPreset::Five, false) => Dims::new(1, 2, 1),
            (DimPreset::Five, true) => Dims::with_s(1, 0, 1, 2),
            (DimPreset::Ten, false) => Dims::new(3, 3, 2),
            (DimPreset::Ten, true) => Dims::with_s(3, 1, 2, 2),
            (DimPreset::Twenty, false) => Dims::new(6, 6, 4),
            (DimPreset::Twenty, true) => Dims::with_s(6, 2, 4, 4),
            (DimPreset::Custom(d), _) => d,
        }
    }

    /// Population size used at both levels.
    pub fn population(self) -> usize {
        match self {
            DimPreset::Five => 30,
            DimPreset::Ten => 50,
            DimPreset::Twenty => 100,
            DimPreset::Custom(d) => match d.upper_len() + d.lower_len() {
                0..=5 => 30,
                6..=10 => 50,
                _ => 100,
            },
        }
    }

    /// The named preset, if any, that gives `id` these dims.
    pub fn named_for(id: ProblemId, dims: Dims) -> Option<DimPreset> {
        [DimPreset::Five, DimPreset::Ten, DimPreset::Twenty].into_iter().find(|p| p.dims(id) == dims)
    }

    /// Total variable count of a named preset.
    pub fn size(self) -> Option<u32> {
        match self {
            DimPreset::Five => Some(5),
            DimPreset::Ten => Some(10),
            DimPreset::Twenty => Some(20),
            DimPreset::Custom(_) => None,
        }
    }
}

impl fmt::Display for DimPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimPreset::Five => f.write_str("5"),
            DimPreset::Ten => f.write_str("10"),
            DimPreset::Twenty => f.write_str("20"),
            DimPreset::Custom(d) => write!(f, "{},{},{},{}", d.p, d.q, d.r, d.s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("dims must be 5, 10, 20 or p,q,r[,s], got {0:?}")]
pub struct ParsePresetError(String);

impl FromStr for DimPreset {
    type Err = ParsePresetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParsePresetError(s.to_string());
        match s.trim() {
            "5" => return Ok(DimPreset::Five),
            "10" => return Ok(DimPreset::Ten),
            "20" => return Ok(DimPreset::Twenty),
            _ => {}
        }
        let parts: Vec<usize> = s.split(',').map(|t| t.trim().parse()).collect::<Result<_, _>>().map_err(|_| err())?;
        let dims = match parts[..] {
            [p, q, r] => Dims::new(p, q, r),
            [p, q, r, s] => Dims::with_s(p, q, r, s),
            _ => return Err(err()),
        };
        dims.validate().map_err(|_| err())?;
        Ok(DimPreset::Custom(dims))
    }
}

impl TryFrom<String> for DimPreset {
    type Error = ParsePresetError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<DimPreset> for String {
    fn from(p: DimPreset) -> String {
        p.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_dim_split() {
        for id in ProblemId::ALL {
            let d = DimPreset::Five.dims(id);
            assert_eq!(d.upper_len() + d.lower_len(), 5, "{id}");
            smd_core::instantiate(id, d).unwrap();
        }
        assert_eq!(DimPreset::Five.dims(ProblemId::Smd6), Dims::with_s(1, 0, 1, 2));
        assert_eq!(DimPreset::Five.dims(ProblemId::Smd1), Dims::new(1, 2, 1));
    }

    #[test]
    fn larger_presets_are_valid() {
        for preset in [DimPreset::Ten, DimPreset::Twenty] {
            for id in ProblemId::ALL {
                let d = preset.dims(id);
                assert_eq!((d.upper_len() + d.lower_len()) as u32, preset.size().unwrap(), "{id}");
                smd_core::instantiate(id, d).unwrap();
            }
        }
        assert_eq!((DimPreset::Ten.population(), DimPreset::Twenty.population()), (50, 100));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["5", "10", "20", "2,2,1,0", "1,0,1,2"] {
            assert_eq!(s.parse::<DimPreset>().unwrap().to_string(), s);
        }
        assert_eq!("1,2,1".parse::<DimPreset>().unwrap(), DimPreset::Custom(Dims::new(1, 2, 1)));
        assert!("7".parse::<DimPreset>().is_err());
        assert!("0,0,0".parse::<DimPreset>().is_err());
    }
}
