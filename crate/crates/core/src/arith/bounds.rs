use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::interval::Interval;
use super::poly::rational_to_f64;
use crate::syntax::Rational;

/// Parameter box plus sampling boxes for variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub params: BTreeMap<String, (Rational, Rational)>,
    pub vars: BTreeMap<String, (f64, f64)>,
    /// Box for variables not listed in `vars`; `None` makes them an error.
    pub default_var: Option<(f64, f64)>,
}

impl Bounds {
    /// Point box for every parameter, `[-1, 1]` for variables.
    pub fn point(values: &BTreeMap<String, Rational>) -> Bounds {
        Bounds {
            params: values
                .iter()
                .map(|(k, v)| (k.clone(), (v.clone(), v.clone())))
                .collect(),
            vars: BTreeMap::new(),
            default_var: Some((-1.0, 1.0)),
        }
    }

    pub fn with_var(mut self, name: &str, lo: f64, hi: f64) -> Bounds {
        self.vars.insert(name.to_string(), (lo, hi));
        self
    }

    pub fn without_default(mut self) -> Bounds {
        self.default_var = None;
        self
    }

    /// Parameter values, if every parameter box is a point.
    pub fn point_values(&self) -> Option<BTreeMap<String, Rational>> {
        self.params
            .iter()
            .map(|(k, (lo, hi))| (lo == hi).then(|| (k.clone(), lo.clone())))
            .collect()
    }

    pub fn param_intervals(&self) -> BTreeMap<String, Interval> {
        self.params
            .iter()
            .map(|(k, (lo, hi))| (k.clone(), Interval::new(lo.clone(), hi.clone())))
            .collect()
    }

    pub fn param_box_f64(&self, name: &str) -> Option<(f64, f64)> {
        self.params
            .get(name)
            .map(|(lo, hi)| (rational_to_f64(lo), rational_to_f64(hi)))
    }

    pub fn var_box(&self, name: &str) -> Option<(f64, f64)> {
        self.vars.get(name).copied().or(self.default_var)
    }
}
