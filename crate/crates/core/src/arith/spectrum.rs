use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::group::{
    chebyshev, classify_conjugacy, enumerate_trace, small_conjugators, GroupElement, GroupParams, Quad,
};
use super::ArithError;
use crate::thermo::OrbitSample;

/// `x_m`, its logarithm and whether trace `2m` is hyperbolic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XmValue {
    pub x: f64,
    pub l: f64,
    pub hyperbolic: bool,
}

/// `x_m = 2m² − 1 + 2m√(m² − 1)`, the squared larger eigenvalue of a trace-`2m` element.
pub fn xm(m: i64) -> Result<XmValue, ArithError> {
    if m <= 0 {
        return Err(ArithError::InvalidArgument(format!("m must be ≥ 1, got {m}")));
    }
    let mf = m as f64;
    let x = 2.0 * mf * mf - 1.0 + 2.0 * mf * (mf * mf - 1.0).sqrt();
    Ok(XmValue { x, l: x.ln(), hyperbolic: m >= 2 })
}

/// Half-traces of conjugators used by [`build_length_spectrum`].
pub const CONJUGATOR_MAX_HALF_TRACE: i64 = 3;

/// Every synthetic spectrum has a class pair whose ratio lies within this fraction of the
/// prescribed stable norm.
pub const SYNTHETIC_DELTA: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightMode {
    ZeroForm,
    /// Per-class ratios `∫_γω / l_γ` drawn in `[−norm, norm]`, odd under inversion.
    Synthetic {
        stable_norm: f64,
    },
    /// Weights supplied by the caller or read back from a cache.
    External,
}

impl WeightMode {
    pub fn tag(&self) -> &'static str {
        match self {
            WeightMode::ZeroForm => "zero-form",
            WeightMode::Synthetic { .. } => "synthetic-homomorphism",
            WeightMode::External => "external",
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One conjugacy class (within the tested conjugators) of a given trace.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthClass {
    pub members: Vec<GroupElement>,
    pub primitive_length: f64,
    pub omega_integral: f64,
}

impl LengthClass {
    pub fn representative(&self) -> &GroupElement {
        &self.members[0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryStatus {
    Found,
    /// No element can exist: `m² − 1 ≡ A·y1² (mod p)` has no solution.
    Absent,
    /// No element inside the box although the congruence allows one.
    Incomplete,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthEntry {
    pub m: i64,
    pub x: f64,
    pub l: f64,
    pub status: EntryStatus,
    pub classes: Vec<LengthClass>,
}

impl LengthEntry {
    /// `μ(m) = Σ_classes e^{∫ω}·l_{γ₀}`
    pub fn mu(&self) -> f64 {
        self.classes.iter().map(|c| c.omega_integral.exp() * c.primitive_length).sum()
    }
}

/// A closed geodesic as consumed by the trace sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geodesic {
    pub length: f64,
    pub primitive_length: f64,
    pub omega_integral: f64,
}

impl Geodesic {
    /// `e^{∫ω}·l_{γ₀} / sinh(l/2)`
    pub fn weight(&self) -> f64 {
        self.omega_integral.exp() * self.primitive_length / (0.5 * self.length).sinh()
    }
}

/// Geodesics together with the length up to which the list is meant to be complete.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicList {
    pub geodesics: Vec<Geodesic>,
    pub covered_up_to: f64,
}

/// Length spectrum of `Γ(A, p)` for half-traces `2..=m_max`, with class weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedLengthSpectrum {
    pub group: GroupParams,
    pub bx: i64,
    pub m_max: i64,
    pub seed: u64,
    pub weight_mode: WeightMode,
    pub entries: Vec<LengthEntry>,
}

impl WeightedLengthSpectrum {
    pub fn entry(&self, m: i64) -> Option<&LengthEntry> {
        self.entries.iter().find(|e| e.m == m)
    }

    pub fn mu(&self, m: i64) -> f64 {
        self.entry(m).map_or(0.0, LengthEntry::mu)
    }

    pub fn incomplete(&self) -> Vec<i64> {
        self.entries.iter().filter(|e| e.status == EntryStatus::Incomplete).map(|e| e.m).collect()
    }

    /// Largest length for which every admissible trace was enumerated.
    pub fn max_length(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.l)
    }

    pub fn geodesics(&self) -> GeodesicList {
        let geodesics = self
            .entries
            .iter()
            .flat_map(|e| {
                e.classes.iter().map(move |c| Geodesic {
                    length: e.l,
                    primitive_length: c.primitive_length,
                    omega_integral: c.omega_integral,
                })
            })
            .collect();
        GeodesicList { geodesics, covered_up_to: self.max_length() }
    }

    /// One orbit sample per class, for the stable-norm scan.
    pub fn orbit_samples(&self) -> Vec<OrbitSample> {
        self.geodesics()
            .geodesics
            .iter()
            .map(|g| OrbitSample { length: g.length, integral: g.omega_integral })
            .collect()
    }

    /// Replaces every class weight with `f(m, class index)`; the mode becomes external.
    pub fn with_weights(&self, f: impl Fn(i64, usize) -> f64) -> Self {
        let mut out = self.clone();
        out.weight_mode = WeightMode::External;
        for e in &mut out.entries {
            for (i, c) in e.classes.iter_mut().enumerate() {
                c.omega_integral = f(e.m, i);
            }
        }
        out
    }
}

/// Enumerates traces `2m`, `2 ≤ m ≤ m_max`, classifies them by conjugation with small
/// elements, detects proper powers and attaches weights.
pub fn build_length_spectrum(
    group: GroupParams,
    m_max: i64,
    bx: i64,
    mode: WeightMode,
    seed: u64,
) -> Result<WeightedLengthSpectrum, ArithError> {
    if m_max < 2 {
        return Err(ArithError::InvalidArgument(format!("m_max must be ≥ 2, got {m_max}")));
    }
    if let WeightMode::Synthetic { stable_norm } = mode {
        if !(stable_norm >= 0.0 && stable_norm.is_finite()) {
            return Err(ArithError::InvalidArgument(format!("stable norm must be ≥ 0, got {stable_norm}")));
        }
    }
    if mode == WeightMode::External {
        return Err(ArithError::InvalidArgument(
            "external weights are attached with `with_weights` or read from a cache".into(),
        ));
    }
    let conjugators = small_conjugators(group, CONJUGATOR_MAX_HALF_TRACE, bx)?;
    let mut entries: Vec<LengthEntry> = Vec::new();
    let mut class_of: HashMap<Quad, (i64, usize)> = HashMap::new();
    // proper-power class -> class of one of its roots
    let mut root: HashMap<(i64, usize), (i64, usize)> = HashMap::new();
    for m in 2..=m_max {
        let xv = xm(m)?;
        let elems = enumerate_trace(group, m, bx)?;
        let partition = classify_conjugacy(&elems, &conjugators)?;
        let status = match (elems.is_empty(), group.trace_admissible(m)) {
            (false, _) => EntryStatus::Found,
            (true, false) => EntryStatus::Absent,
            (true, true) => EntryStatus::Incomplete,
        };
        let mut classes: Vec<LengthClass> = partition
            .classes
            .into_iter()
            .map(|members| LengthClass { members, primitive_length: xv.l, omega_integral: 0.0 })
            .collect();
        for (ci, c) in classes.iter().enumerate() {
            for g in &c.members {
                class_of.insert(g.coords(), (m, ci));
            }
        }
        // a class is a proper power when one of its members is δ^k, δ enumerated at m′ < m
        for prev in &entries {
            for k in 2..=64u32 {
                match chebyshev(k, prev.m) {
                    Some(t) if t == m => {}
                    Some(t) if t < m => continue,
                    _ => break,
                }
                for (cj, c) in prev.classes.iter().enumerate() {
                    for d in &c.members {
                        let Ok(pw) = d.pow(k) else { continue };
                        if let Some(&(_, ci)) = class_of.get(&pw.coords()).filter(|(mm, _)| *mm == m) {
                            if c.primitive_length < classes[ci].primitive_length {
                                classes[ci].primitive_length = c.primitive_length;
                                root.insert((m, ci), (prev.m, cj));
                            }
                        }
                    }
                }
            }
        }
        entries.push(LengthEntry { m, x: xv.x, l: xv.l, status, classes });
    }
    if let WeightMode::Synthetic { stable_norm } = mode {
        assign_synthetic(&mut entries, &class_of, &root, stable_norm, seed)?;
    }
    Ok(WeightedLengthSpectrum { group, bx, m_max, seed, weight_mode: mode, entries })
}

/// Draws a ratio `s ∈ [−N, N]` per primitive class pair `{γ, γ⁻¹}` (`s = 0` when the
/// class contains its own inverse), so `∫_{γ⁻¹}ω = −∫_γω`; proper powers inherit the
/// ratio of their root. The first pair with distinct orientations is placed in
/// `[(1 − δ)N, N]`.
fn assign_synthetic(
    entries: &mut [LengthEntry],
    class_of: &HashMap<Quad, (i64, usize)>,
    root: &HashMap<(i64, usize), (i64, usize)>,
    norm: f64,
    seed: u64,
) -> Result<(), ArithError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratio: HashMap<(i64, usize), f64> = HashMap::new();
    let mut extremal_placed = false;
    for e in entries.iter() {
        for (ci, c) in e.classes.iter().enumerate() {
            let key = (e.m, ci);
            if ratio.contains_key(&key) {
                continue;
            }
            if let Some(r) = root.get(&key) {
                // roots have smaller traces, so their ratio is already set
                ratio.insert(key, ratio[r]);
                continue;
            }
            let partner = class_of.get(&c.members[0].inverse().coords()).copied();
            if partner == Some(key) {
                ratio.insert(key, 0.0);
                continue;
            }
            let s = if extremal_placed {
                rng.random_range(-norm..=norm)
            } else {
                extremal_placed = true;
                norm * (1.0 - SYNTHETIC_DELTA * rng.random::<f64>())
            };
            ratio.insert(key, s);
            if let Some(pk) = partner {
                ratio.insert(pk, -s);
            }
        }
    }
    if !extremal_placed && norm > 0.0 {
        return Err(ArithError::NoOrientedPair);
    }
    for e in entries.iter_mut() {
        for (ci, c) in e.classes.iter_mut().enumerate() {
            c.omega_integral = ratio[&(e.m, ci)] * e.l;
        }
    }
    Ok(())
}

const CACHE_MAGIC: &str = "# speclab length-spectrum cache v1";
const CACHE_COLUMNS: &str = "m,y0,y1,y2,y3,class_id,primitive_length,omega_integral";

impl WeightedLengthSpectrum {
    /// Line-based cache: `#` header lines carrying the parameters, then one row per element.
    pub fn to_cache_string(&self) -> String {
        let mut out = String::new();
        out.push_str(CACHE_MAGIC);
        out.push('\n');
        out.push_str(&format!(
            "# A={}\n# p={}\n# box={}\n# m_max={}\n# seed={}\n",
            self.group.a(),
            self.group.p(),
            self.bx,
            self.m_max,
            self.seed
        ));
        out.push_str(&format!("# weight_mode={}\n", self.weight_mode.tag()));
        if let WeightMode::Synthetic { stable_norm } = self.weight_mode {
            out.push_str(&format!("# stable_norm={stable_norm:?}\n"));
        }
        out.push_str(CACHE_COLUMNS);
        out.push('\n');
        for e in &self.entries {
            for (ci, c) in e.classes.iter().enumerate() {
                for g in &c.members {
                    let [y0, y1, y2, y3] = g.coords();
                    out.push_str(&format!(
                        "{},{y0},{y1},{y2},{y3},{ci},{:?},{:?}\n",
                        e.m, c.primitive_length, c.omega_integral
                    ));
                }
            }
        }
        out
    }

    /// Parses a cache; `expect` rejects a file written for other `(A, p, box)`.
    pub fn from_cache_str(text: &str, expect: Option<(i64, i64, i64)>) -> Result<Self, ArithError> {
        let corrupt = |line: usize, msg: &str| ArithError::Cache { line, msg: msg.to_string() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l == CACHE_MAGIC => {}
            _ => return Err(corrupt(1, "missing cache header")),
        }
        let mut header: BTreeMap<String, String> = BTreeMap::new();
        let mut last_line = 1;
        let mut rows = Vec::new();
        let mut seen_columns = false;
        for (ln, line) in lines {
            last_line = ln;
            if let Some(h) = line.strip_prefix("# ") {
                if seen_columns {
                    return Err(corrupt(ln, "header line after the column line"));
                }
                let (k, v) = h.split_once('=').ok_or_else(|| corrupt(ln, "header line without '='"))?;
                header.insert(k.to_string(), v.to_string());
            } else if line == CACHE_COLUMNS {
                seen_columns = true;
            } else if seen_columns {
                rows.push((ln, line));
            } else {
                return Err(corrupt(ln, "data before the column line"));
            }
        }
        if !seen_columns {
            return Err(corrupt(last_line, "truncated: no column line"));
        }
        let get = |k: &str| -> Result<i64, ArithError> {
            header
                .get(k)
                .ok_or_else(|| corrupt(1, &format!("header lacks {k}")))?
                .parse::<i64>()
                .map_err(|e| corrupt(1, &format!("{k}: {e}")))
        };
        let (a, p, bx, m_max) = (get("A")?, get("p")?, get("box")?, get("m_max")?);
        let seed = get("seed")? as u64;
        if let Some((ea, ep, eb)) = expect {
            if (ea, ep, eb) != (a, p, bx) {
                return Err(ArithError::CacheMismatch { found: (a, p, bx), expected: (ea, ep, eb) });
            }
        }
        let group = GroupParams::new(a, p)?;
        let mode = match header.get("weight_mode").map(String::as_str) {
            Some("zero-form") => WeightMode::ZeroForm,
            Some("external") => WeightMode::External,
            Some("synthetic-homomorphism") => {
                let n = header
                    .get("stable_norm")
                    .ok_or_else(|| corrupt(1, "synthetic cache lacks stable_norm"))?
                    .parse::<f64>()
                    .map_err(|e| corrupt(1, &format!("stable_norm: {e}")))?;
                WeightMode::Synthetic { stable_norm: n }
            }
            _ => return Err(corrupt(1, "unknown weight_mode")),
        };
        let mut by_m: BTreeMap<i64, BTreeMap<usize, LengthClass>> = BTreeMap::new();
        for (ln, line) in rows {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(corrupt(ln, &format!("expected 8 fields, found {}", f.len())));
            }
            let int = |s: &str| s.parse::<i64>().map_err(|e| corrupt(ln, &e.to_string()));
            let real = |s: &str| s.parse::<f64>().map_err(|e| corrupt(ln, &e.to_string()));
            let m = int(f[0])?;
            let y = [int(f[1])?, int(f[2])?, int(f[3])?, int(f[4])?];
            let ci = int(f[5])? as usize;
            let (pl, om) = (real(f[6])?, real(f[7])?);
            if y[0] != m || !(2..=m_max).contains(&m) {
                return Err(corrupt(ln, "row trace outside the cached range"));
            }
            let g = GroupElement::new(y, group).map_err(|e| corrupt(ln, &e.to_string()))?;
            let class = by_m.entry(m).or_default().entry(ci).or_insert_with(|| LengthClass {
                members: Vec::new(),
                primitive_length: pl,
                omega_integral: om,
            });
            class.members.push(g);
        }
        let mut entries = Vec::new();
        for m in 2..=m_max {
            let xv = xm(m)?;
            let classes: Vec<LengthClass> = by_m.remove(&m).map(|c| c.into_values().collect()).unwrap_or_default();
            let status = if !classes.is_empty() {
                EntryStatus::Found
            } else if group.trace_admissible(m) {
                EntryStatus::Incomplete
            } else {
                EntryStatus::Absent
            };
            entries.push(LengthEntry { m, x: xv.x, l: xv.l, status, classes });
        }
        Ok(Self { group, bx, m_max, seed, weight_mode: mode, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::stable_norm;

    fn g25() -> GroupParams {
        GroupParams::new(2, 5).unwrap()
    }

    #[test]
    fn xm_values() {
        let v = xm(2).unwrap();
        assert!((v.x - 13.928203230275509).abs() < 1e-12);
        assert!((v.l - 2.633915793849634).abs() < 1e-12);
        assert!(v.hyperbolic);
        assert_eq!(xm(1).unwrap(), XmValue { x: 1.0, l: 0.0, hyperbolic: false });
        assert!(xm(0).is_err());
        let big = xm(1_000_000).unwrap();
        let acosh = 2.0 * (1e6f64).acosh();
        assert!((big.l - acosh).abs() <= 1e-12 * acosh);
    }

    #[test]
    fn zero_form_entries() {
        let s = build_length_spectrum(g25(), 5, 8, WeightMode::ZeroForm, 0).unwrap();
        assert_eq!(s.entries.len(), 4);
        for e in &s.entries {
            assert_eq!(e.l, xm(e.m).unwrap().l);
            let prim: f64 = e.classes.iter().map(|c| c.primitive_length).sum();
            assert_eq!(e.mu(), prim);
            assert!(e.classes.iter().all(|c| c.omega_integral == 0.0));
        }
        assert_eq!(s.entry(5).unwrap().status, EntryStatus::Absent);
        assert!(s.incomplete().is_empty());
    }

    #[test]
    fn squares_are_not_primitive() {
        // T_2(2) = 7: squares of trace-4 elements have trace 14
        let s = build_length_spectrum(g25(), 7, 8, WeightMode::ZeroForm, 0).unwrap();
        let l2 = xm(2).unwrap().l;
        let e7 = s.entry(7).unwrap();
        let powers = e7.classes.iter().filter(|c| (c.primitive_length - l2).abs() < 1e-15).count();
        assert!(powers > 0);
        assert!(e7.classes.iter().all(|c| c.primitive_length == l2 || c.primitive_length == e7.l));
        let mut checked = 0;
        for c in &s.entry(2).unwrap().classes {
            for d in &c.members {
                let sq = d.pow(2).unwrap();
                if let Some(owner) = e7.classes.iter().find(|c| c.members.contains(&sq)) {
                    assert_eq!(owner.primitive_length, l2);
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn synthetic_weights_reach_the_norm() {
        let s = build_length_spectrum(g25(), 9, 8, WeightMode::Synthetic { stable_norm: 1.0 }, 7).unwrap();
        let sn = stable_norm(&s.orbit_samples()).unwrap();
        assert!(sn >= 1.0 - SYNTHETIC_DELTA && sn <= 1.0);
        for o in s.orbit_samples() {
            assert!((o.integral / o.length).abs() <= 1.0);
        }
        let again = build_length_spectrum(g25(), 9, 8, WeightMode::Synthetic { stable_norm: 1.0 }, 7).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn synthetic_weights_are_odd() {
        let s = build_length_spectrum(g25(), 4, 8, WeightMode::Synthetic { stable_norm: 0.5 }, 3).unwrap();
        for e in &s.entries {
            for c in &e.classes {
                let inv = c.members[0].inverse();
                let other = e.classes.iter().find(|d| d.members.contains(&inv)).unwrap();
                assert!((other.omega_integral + c.omega_integral).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cache_round_trip() {
        for mode in [WeightMode::ZeroForm, WeightMode::Synthetic { stable_norm: 0.75 }] {
            let s = build_length_spectrum(g25(), 5, 8, mode, 11).unwrap();
            let text = s.to_cache_string();
            let back = WeightedLengthSpectrum::from_cache_str(&text, Some((2, 5, 8))).unwrap();
            assert_eq!(s, back);
            assert!(matches!(
                WeightedLengthSpectrum::from_cache_str(&text, Some((2, 5, 9))),
                Err(ArithError::CacheMismatch { .. })
            ));
        }
    }

    #[test]
    fn truncated_cache_reports_line() {
        let s = build_length_spectrum(g25(), 3, 6, WeightMode::ZeroForm, 0).unwrap();
        let text = s.to_cache_string();
        let cut = &text[..text.len() - 10];
        match WeightedLengthSpectrum::from_cache_str(cut, None) {
            Err(ArithError::Cache { line, .. }) => assert_eq!(line, cut.lines().count()),
            other => panic!("{other:?}"),
        }
        let header_only: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(WeightedLengthSpectrum::from_cache_str(&header_only, None), Err(ArithError::Cache { .. })));
    }
}
