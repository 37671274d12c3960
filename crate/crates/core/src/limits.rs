//! Resource limits. Every stage is bounded by one of these.

/// Hard ceiling on `max_depth`, even for explicitly raised limits. Tree
/// construction is iterative but validation and tree drop recurse once per
/// nesting level.
pub const DEPTH_CEILING: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Limits {
    pub max_input_bytes: u64,
    pub max_depth: u64,
    pub max_attrs_per_element: u64,
    pub max_name_bytes: u64,
    pub max_attr_value_bytes: u64,
    pub max_total_nodes: u64,
    pub max_occurs_bound: u64,
    pub max_automaton_states: u64,
    pub max_pattern_length: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_input_bytes: 64 * 1024 * 1024,
            max_depth: 256,
            max_attrs_per_element: 64,
            max_name_bytes: 1024,
            max_attr_value_bytes: 64 * 1024,
            max_total_nodes: 1_000_000,
            max_occurs_bound: 1024,
            max_automaton_states: 65_536,
            max_pattern_length: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LimitError {
    #[error("unknown limit {0}")]
    UnknownName(String),
    #[error("limit {0} must be a positive integer")]
    NotPositive(&'static str),
    #[error("limit max_depth cannot exceed {DEPTH_CEILING}")]
    AboveCeiling,
}

impl Limits {
    /// Limit names in sorted order, as used on the command line and in the
    /// audit report.
    pub const NAMES: [&'static str; 9] = [
        "max_attr_value_bytes",
        "max_attrs_per_element",
        "max_automaton_states",
        "max_depth",
        "max_input_bytes",
        "max_name_bytes",
        "max_occurs_bound",
        "max_pattern_length",
        "max_total_nodes",
    ];

    pub fn get(&self, name: &str) -> Option<u64> {
        Some(match name {
            "max_attr_value_bytes" => self.max_attr_value_bytes,
            "max_attrs_per_element" => self.max_attrs_per_element,
            "max_automaton_states" => self.max_automaton_states,
            "max_depth" => self.max_depth,
            "max_input_bytes" => self.max_input_bytes,
            "max_name_bytes" => self.max_name_bytes,
            "max_occurs_bound" => self.max_occurs_bound,
            "max_pattern_length" => self.max_pattern_length,
            "max_total_nodes" => self.max_total_nodes,
            _ => return None,
        })
    }

    /// Returns a copy with one limit replaced.
    pub fn with(&self, name: &str, value: u64) -> Result<Limits, LimitError> {
        let mut next = *self;
        let slot = match name {
            "max_attr_value_bytes" => &mut next.max_attr_value_bytes,
            "max_attrs_per_element" => &mut next.max_attrs_per_element,
            "max_automaton_states" => &mut next.max_automaton_states,
            "max_depth" => &mut next.max_depth,
            "max_input_bytes" => &mut next.max_input_bytes,
            "max_name_bytes" => &mut next.max_name_bytes,
            "max_occurs_bound" => &mut next.max_occurs_bound,
            "max_pattern_length" => &mut next.max_pattern_length,
            "max_total_nodes" => &mut next.max_total_nodes,
            other => return Err(LimitError::UnknownName(other.to_owned())),
        };
        *slot = value;
        next.check()?;
        Ok(next)
    }

    pub fn check(&self) -> Result<(), LimitError> {
        for name in Self::NAMES {
            if self.get(name) == Some(0) {
                return Err(LimitError::NotPositive(name));
            }
        }
        if self.max_depth > DEPTH_CEILING {
            return Err(LimitError::AboveCeiling);
        }
        Ok(())
    }

    /// `(name, value)` pairs sorted by name.
    pub fn entries(&self) -> Vec<(&'static str, u64)> {
        Self::NAMES
            .iter()
            .map(|&n| (n, self.get(n).unwrap_or(0)))
            .collect()
    }
}
