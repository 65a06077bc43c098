use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resource limits for the potentially explosive searches.
///
/// Every field can be overridden from the command line with
/// `--budget KEY=VALUE`; the keys are the field names below.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields, default)]
pub struct Budget {
    /// Maximum number of distinct subsets visited while enumerating the
    /// orbit of a subset inside the power set.
    pub power_set_orbit: usize,
    /// Largest ambient size 2n for the cyclic overlap-threshold enumeration.
    pub sm_max_2n: u64,
    /// Maximum number of vertices explored by graph searches on coset and
    /// orbit graphs.
    pub bfs_vertices: usize,
    /// Cap on vertices of a finite graph for which all-pairs distances are
    /// cached.
    pub graph_vertices: usize,
    /// Cap on vertices for the cubic-time median verification.
    pub median_check_vertices: usize,
    /// Maximum number of elements in an involutive preordered set.
    pub preposet_elements: usize,
    /// Maximum number of ultraselections enumerated before giving up.
    pub ultraselections: usize,
    /// Maximum number of group elements produced by closure of a generating
    /// set of permutations.
    pub group_closure: usize,
    /// Maximum number of wreath elements enumerated in a sublevel-set search.
    pub wreath_box: usize,
    /// Maximum mediant-refinement depth while isolating kink rays.
    pub kink_depth: usize,
    /// Largest horizon used by the slope detector before flagging
    /// non-stabilization.
    pub horizon_cap: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            power_set_orbit: 1_000_000,
            sm_max_2n: 20,
            bfs_vertices: 100_000,
            graph_vertices: 5_000,
            median_check_vertices: 640,
            preposet_elements: 40,
            ultraselections: 1_000_000,
            group_closure: 100_000,
            wreath_box: 2_000_000,
            kink_depth: 64,
            horizon_cap: 512,
        }
    }
}

impl Budget {
    /// Applies a `KEY=VALUE` override as accepted by the command line.
    pub fn set(&mut self, key: &str, value: u64) -> Result<()> {
        let v = value as usize;
        match key {
            "power_set_orbit" => self.power_set_orbit = v,
            "sm_max_2n" => self.sm_max_2n = value,
            "bfs_vertices" => self.bfs_vertices = v,
            "graph_vertices" => self.graph_vertices = v,
            "median_check_vertices" => self.median_check_vertices = v,
            "preposet_elements" => self.preposet_elements = v,
            "ultraselections" => self.ultraselections = v,
            "group_closure" => self.group_closure = v,
            "wreath_box" => self.wreath_box = v,
            "kink_depth" => self.kink_depth = v,
            "horizon_cap" => self.horizon_cap = value,
            other => {
                return Err(Error::Parse(format!("unknown budget key: {other}")));
            }
        }
        Ok(())
    }

    /// Parses a `KEY=VALUE` budget override.
    pub fn parse_override(spec: &str) -> Result<(String, u64)> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("budget override must be KEY=VALUE: {spec}")))?;
        let value: u64 = value
            .parse()
            .map_err(|_| Error::Parse(format!("budget value must be an integer: {spec}")))?;
        Ok((key.to_string(), value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_roundtrip() {
        let mut b = Budget::default();
        let (k, v) = Budget::parse_override("bfs_vertices=123").unwrap();
        b.set(&k, v).unwrap();
        assert_eq!(b.bfs_vertices, 123);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut b = Budget::default();
        assert!(b.set("no_such_budget", 1).is_err());
    }
}
