//! Subframe plans: the per-period pattern of backhaul, direct-only and
//! normal access subframes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One TTI's role within a plan period.
///
/// - `B`: backhaul subframe. The donor transmits (to relay nodes and direct
///   UEs); relay nodes listen.
/// - `D`: direct-only access subframe. The donor serves direct UEs; relay
///   nodes stay silent in both directions.
/// - `U`: normal access subframe. Relay nodes with queued data transmit to
///   their UEs while the donor serves direct UEs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubframeKind {
    B,
    D,
    U,
}

impl SubframeKind {
    pub fn letter(&self) -> char {
        match self {
            SubframeKind::B => 'B',
            SubframeKind::D => 'D',
            SubframeKind::U => 'U',
        }
    }

    /// Index for per-kind aggregation arrays.
    pub fn index(&self) -> usize {
        match self {
            SubframeKind::B => 0,
            SubframeKind::D => 1,
            SubframeKind::U => 2,
        }
    }
}

impl std::fmt::Display for SubframeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Repeating subframe pattern. Legal plans have at least one backhaul
/// subframe and all backhaul subframes form a contiguous prefix; direct-only
/// and normal access subframes may follow in any order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubframePlan {
    slots: Vec<SubframeKind>,
}

impl SubframePlan {
    pub fn new(slots: Vec<SubframeKind>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::domain("subframe plan must be non-empty"));
        }
        let n_b = slots.iter().filter(|k| **k == SubframeKind::B).count();
        if n_b == 0 {
            return Err(Error::domain(
                "subframe plan needs at least one backhaul (B) subframe",
            ));
        }
        if slots[..n_b].iter().any(|k| *k != SubframeKind::B) {
            return Err(Error::domain(
                "backhaul subframes must form a contiguous prefix of the plan",
            ));
        }
        Ok(SubframePlan { slots })
    }

    /// Parses either a letter pattern like `"BDDDUU"` or an eight-subframe
    /// partition like `"2/6"`.
    pub fn parse(s: &str) -> Result<Self> {
        if s.contains('/') {
            return SubframePlan::from_partition(s);
        }
        let slots = s
            .chars()
            .map(|c| match c {
                'B' | 'b' => Ok(SubframeKind::B),
                'D' | 'd' => Ok(SubframeKind::D),
                'U' | 'u' => Ok(SubframeKind::U),
                other => Err(Error::domain(format!(
                    "unknown subframe letter {other:?} in plan {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        SubframePlan::new(slots)
    }

    /// FDD-style eight-subframe partition `"k/m"` with `k + m = 8`:
    /// `k` backhaul subframes followed by `m` normal access subframes.
    pub fn from_partition(s: &str) -> Result<Self> {
        let parse_err = || Error::domain(format!("partition {s:?} must look like \"1/7\" .. \"7/1\""));
        let (k, m) = s.split_once('/').ok_or_else(parse_err)?;
        let k: usize = k.trim().parse().map_err(|_| parse_err())?;
        let m: usize = m.trim().parse().map_err(|_| parse_err())?;
        if k == 0 || m == 0 || k + m != 8 {
            return Err(Error::domain(format!(
                "partition {s:?} must split 8 subframes with at least one on each side"
            )));
        }
        let mut slots = vec![SubframeKind::B; k];
        slots.extend(std::iter::repeat(SubframeKind::U).take(m));
        SubframePlan::new(slots)
    }

    pub fn period(&self) -> u64 {
        self.slots.len() as u64
    }

    pub fn kind_at(&self, tti: u64) -> SubframeKind {
        self.slots[(tti % self.period()) as usize]
    }

    pub fn count(&self, kind: SubframeKind) -> usize {
        self.slots.iter().filter(|k| **k == kind).count()
    }

    /// Backhaul share of the period.
    pub fn alpha(&self) -> f64 {
        self.count(SubframeKind::B) as f64 / self.period() as f64
    }

    pub fn slots(&self) -> &[SubframeKind] {
        &self.slots
    }
}

impl std::fmt::Display for SubframePlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for k in &self.slots {
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl Serialize for SubframePlan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SubframePlan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        SubframePlan::parse(&s).map_err(serde::de::Error::custom)
    }
}
