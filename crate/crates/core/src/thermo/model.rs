use serde::{Deserialize, Serialize};

use super::ThermoError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    #[serde(default)]
    pub q: f64,
    #[serde(default = "unit_roof")]
    pub roof: f64,
}

fn unit_roof() -> f64 {
    1.0
}

fn default_d_minus_1() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    states: usize,
    edges: Vec<Edge>,
    #[serde(default = "default_d_minus_1")]
    d_minus_1: f64,
}

/// Irreducible subshift of finite type with an edge observable `q` and a positive roof.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovModel {
    n: usize,
    allowed: Vec<bool>,
    q: Vec<f64>,
    roof: Vec<f64>,
    pub d_minus_1: f64,
}

impl MarkovModel {
    pub fn from_edges(n: usize, edges: &[Edge], d_minus_1: f64) -> Result<Self, ThermoError> {
        if n == 0 {
            return Err(ThermoError::InvalidModel("no states".into()));
        }
        if !(d_minus_1 > 0.0 && d_minus_1.is_finite()) {
            return Err(ThermoError::InvalidModel(format!("d_minus_1 = {d_minus_1}")));
        }
        let mut allowed = vec![false; n * n];
        let mut q = vec![0.0; n * n];
        let mut roof = vec![0.0; n * n];
        for e in edges {
            if e.from >= n || e.to >= n {
                return Err(ThermoError::InvalidModel(format!("edge {}->{} outside {n} states", e.from, e.to)));
            }
            let idx = e.from * n + e.to;
            if allowed[idx] {
                return Err(ThermoError::InvalidModel(format!("duplicate edge {}->{}", e.from, e.to)));
            }
            if !e.q.is_finite() {
                return Err(ThermoError::InvalidModel(format!("q on {}->{} not finite", e.from, e.to)));
            }
            if !(e.roof > 0.0 && e.roof.is_finite()) {
                return Err(ThermoError::InvalidModel(format!(
                    "roof on {}->{} must be positive, got {}",
                    e.from, e.to, e.roof
                )));
            }
            allowed[idx] = true;
            q[idx] = e.q;
            roof[idx] = e.roof;
        }
        let model = Self { n, allowed, q, roof, d_minus_1 };
        if !model.is_irreducible() {
            return Err(ThermoError::NotIrreducible);
        }
        Ok(model)
    }

    /// Full shift on `q_by_symbol.len()` symbols; the edge `i → j` carries `q_by_symbol[j]`.
    pub fn full_shift(q_by_symbol: &[f64]) -> Result<Self, ThermoError> {
        Self::full_shift_with_roof(q_by_symbol, &vec![1.0; q_by_symbol.len()])
    }

    pub fn full_shift_with_roof(q_by_symbol: &[f64], roof_by_symbol: &[f64]) -> Result<Self, ThermoError> {
        let n = q_by_symbol.len();
        if roof_by_symbol.len() != n {
            return Err(ThermoError::InvalidModel("roof and q lengths differ".into()));
        }
        let edges: Vec<Edge> = (0..n)
            .flat_map(|i| (0..n).map(move |j| Edge { from: i, to: j, q: q_by_symbol[j], roof: roof_by_symbol[j] }))
            .collect();
        Self::from_edges(n, &edges, 1.0)
    }

    /// Golden-mean shift: `1 → 1` forbidden.
    pub fn golden_mean() -> Self {
        let edges = [(0, 0), (0, 1), (1, 0)].map(|(from, to)| Edge { from, to, q: 0.0, roof: 1.0 });
        Self::from_edges(2, &edges, 1.0).expect("golden mean shift is irreducible")
    }

    pub fn from_json(text: &str) -> Result<Self, ThermoError> {
        let doc: ModelDoc = serde_json::from_str(text).map_err(|e| ThermoError::InvalidModel(e.to_string()))?;
        Self::from_edges(doc.states, &doc.edges, doc.d_minus_1)
    }

    pub fn to_json(&self) -> String {
        let edges = self.edges();
        serde_json::json!({ "states": self.n, "edges": edges, "d_minus_1": self.d_minus_1 }).to_string()
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                let idx = i * self.n + j;
                if self.allowed[idx] {
                    out.push(Edge { from: i, to: j, q: self.q[idx], roof: self.roof[idx] });
                }
            }
        }
        out
    }

    pub fn allowed(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.n + j]
    }

    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    pub fn roof(&self, i: usize, j: usize) -> f64 {
        self.roof[i * self.n + j]
    }

    pub fn has_unit_roof(&self) -> bool {
        self.edges().iter().all(|e| e.roof == 1.0)
    }

    /// Copy with every roof value replaced.
    pub fn with_roof(&self, roof: impl Fn(usize, usize) -> f64) -> Result<Self, ThermoError> {
        let edges: Vec<Edge> = self.edges().into_iter().map(|e| Edge { roof: roof(e.from, e.to), ..e }).collect();
        Self::from_edges(self.n, &edges, self.d_minus_1)
    }

    pub fn with_d_minus_1(mut self, d_minus_1: f64) -> Result<Self, ThermoError> {
        if !(d_minus_1 > 0.0 && d_minus_1.is_finite()) {
            return Err(ThermoError::InvalidModel(format!("d_minus_1 = {d_minus_1}")));
        }
        self.d_minus_1 = d_minus_1;
        Ok(self)
    }

    /// Dense matrix `A_ij·exp(f(i, j))` over allowed edges, zero elsewhere.
    pub(crate) fn weighted(&self, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if self.allowed[i * n + j] {
                    m[i * n + j] = f(i, j);
                }
            }
        }
        m
    }

    fn is_irreducible(&self) -> bool {
        let reach = |forward: bool| {
            let mut seen = vec![false; self.n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for w in 0..self.n {
                    let edge = if forward { self.allowed(v, w) } else { self.allowed(w, v) };
                    if edge && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reducible_graph_is_rejected() {
        let edges = [(0, 0), (0, 1), (1, 1)].map(|(from, to)| Edge { from, to, q: 0.0, roof: 1.0 });
        assert!(matches!(MarkovModel::from_edges(2, &edges, 1.0), Err(ThermoError::NotIrreducible)));
    }

    #[test]
    fn nonpositive_roof_is_rejected() {
        assert!(MarkovModel::full_shift_with_roof(&[0.0, 1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = MarkovModel::full_shift_with_roof(&[0.0, 1.0], &[1.0, 2.0]).unwrap();
        let back = MarkovModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let text = r#"{"states":2,"edges":[{"from":0,"to":1},{"from":1,"to":0}]}"#;
        let cyc = MarkovModel::from_json(text).unwrap();
        assert!(cyc.has_unit_roof());
        assert_eq!(cyc.d_minus_1, 1.0);
        assert!(MarkovModel::from_json(r#"{"states":1,"edges":[],"extra":1}"#).is_err());
    }
}
