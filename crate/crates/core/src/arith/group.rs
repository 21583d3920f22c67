use std::collections::HashMap;

use rayon::prelude::*;

use super::ArithError;

/// Quaternion coordinates `(y0, y1, y2, y3)` in the basis `1, i, j, ij` with
/// `i² = A`, `j² = p`, `ij = −ji`.
pub type Quad = [i64; 4];

/// Parameters `(A, p)` of the group `Γ(A, p)`, validated once.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupParams {
    a: i64,
    p: i64,
}

fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(b: i64, mut e: i64, m: i64) -> i64 {
    let (mut acc, m128) = (1i128, m as i128);
    let mut b128 = b.rem_euclid(m) as i128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b128 % m128;
        }
        b128 = b128 * b128 % m128;
        e >>= 1;
    }
    acc as i64
}

impl GroupParams {
    /// Requires `p` prime with `p ≡ 1 mod 4` and `A ≥ 1` a quadratic non-residue mod `p`.
    pub fn new(a: i64, p: i64) -> Result<Self, ArithError> {
        if !is_prime(p) || p % 4 != 1 {
            return Err(ArithError::InvalidGroup(format!("p = {p} must be a prime ≡ 1 mod 4")));
        }
        if p > 1 << 20 {
            return Err(ArithError::InvalidGroup(format!("p = {p} too large for exact enumeration")));
        }
        if a < 1 || a % p == 0 || pow_mod(a, (p - 1) / 2, p) != p - 1 {
            return Err(ArithError::InvalidGroup(format!("A = {a} is not a quadratic non-residue mod {p}")));
        }
        Ok(Self { a, p })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    /// Whether `m² − 1 ≡ A·y1² (mod p)` has a solution, a necessary condition for
    /// trace `2m` to occur at all.
    pub fn trace_admissible(&self, m: i64) -> bool {
        let p = self.p as i128;
        let lhs = ((m as i128) * (m as i128) - 1).rem_euclid(p);
        (0..self.p as i128).any(|y| (self.a as i128 * y * y - lhs).rem_euclid(p) == 0)
    }
}

/// `y0² − A·y1² − p·y2² + A·p·y3² − 1`.
pub fn norm_form_residual(y: Quad, a: i64, p: i64) -> i128 {
    let [y0, y1, y2, y3] = y.map(|v| v as i128);
    let (a, p) = (a as i128, p as i128);
    y0 * y0 - a * y1 * y1 - p * y2 * y2 + a * p * y3 * y3 - 1
}

/// An element of `Γ(A, p)`: an integer quaternion of reduced norm 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    y: Quad,
    group: GroupParams,
}

fn narrow(v: i128) -> Result<i64, ArithError> {
    i64::try_from(v).map_err(|_| ArithError::Overflow)
}

impl GroupElement {
    pub fn new(y: Quad, group: GroupParams) -> Result<Self, ArithError> {
        let r = norm_form_residual(y, group.a, group.p);
        if r != 0 {
            return Err(ArithError::NotInGroup { y, residual: r });
        }
        Ok(Self { y, group })
    }

    pub fn identity(group: GroupParams) -> Self {
        Self { y: [1, 0, 0, 0], group }
    }

    pub fn coords(&self) -> Quad {
        self.y
    }

    pub fn group(&self) -> GroupParams {
        self.group
    }

    /// Half the matrix trace.
    pub fn half_trace(&self) -> i64 {
        self.y[0]
    }

    /// Inverse is the quaternion conjugate since the norm is 1.
    pub fn inverse(&self) -> Self {
        let [y0, y1, y2, y3] = self.y;
        Self { y: [y0, -y1, -y2, -y3], group: self.group }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ArithError> {
        let (a, b) = (self.group.a as i128, self.group.p as i128);
        let [x0, x1, x2, x3] = self.y.map(|v| v as i128);
        let [y0, y1, y2, y3] = other.y.map(|v| v as i128);
        let z = [
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        ];
        Ok(Self { y: [narrow(z[0])?, narrow(z[1])?, narrow(z[2])?, narrow(z[3])?], group: self.group })
    }

    /// `g·self·g⁻¹`
    pub fn conjugate_by(&self, g: &Self) -> Result<Self, ArithError> {
        g.mul(self)?.mul(&g.inverse())
    }

    pub fn pow(&self, k: u32) -> Result<Self, ArithError> {
        let mut acc = Self::identity(self.group);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Real matrix `((y0+y1√A, y2√p+y3√(Ap)), (y2√p−y3√(Ap), y0−y1√A))`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (sa, sp) = ((self.group.a as f64).sqrt(), (self.group.p as f64).sqrt());
        let [y0, y1, y2, y3] = self.y.map(|v| v as f64);
        [[y0 + y1 * sa, y2 * sp + y3 * sa * sp], [y2 * sp - y3 * sa * sp, y0 - y1 * sa]]
    }
}

/// Every element with `y0 = m` and `|y1|, |y2|, |y3| ≤ box`, in lexicographic order.
///
/// Complete only within the box: the quadric has unbounded solution sets.
pub fn enumerate_trace(group: GroupParams, m: i64, bx: i64) -> Result<Vec<GroupElement>, ArithError> {
    if bx < 1 {
        return Err(ArithError::InvalidArgument(format!("box must be ≥ 1, got {bx}")));
    }
    let (a, p) = (group.a as i128, group.p as i128);
    let m2 = (m as i128) * (m as i128);
    let mut out: Vec<GroupElement> = (-bx..=bx)
        .into_par_iter()
        .flat_map_iter(|y1| {
            let mut found = Vec::new();
            for y3 in -bx..=bx {
                // p·y2² = m² − 1 − A·y1² + A·p·y3²
                let num = m2 - 1 - a * (y1 as i128).pow(2) + a * p * (y3 as i128).pow(2);
                if num < 0 || num % p != 0 {
                    continue;
                }
                let sq = num / p;
                let r = isqrt(sq);
                if r * r != sq || r > bx as i128 {
                    continue;
                }
                let r = r as i64;
                for y2 in if r == 0 { vec![0] } else { vec![-r, r] } {
                    found.push(GroupElement { y: [m, y1, y2, y3], group });
                }
            }
            found
        })
        .collect();
    out.sort_by_key(|g| g.y);
    Ok(out)
}

fn isqrt(n: i128) -> i128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Elements with half-trace `1..=max_half_trace` inside the box, used as conjugators.
pub fn small_conjugators(group: GroupParams, max_half_trace: i64, bx: i64) -> Result<Vec<GroupElement>, ArithError> {
    let mut out = Vec::new();
    for m in 1..=max_half_trace {
        out.extend(enumerate_trace(group, m, bx)?);
    }
    Ok(out)
}

/// A partition of elements sharing one trace, each class sorted with its least
/// element first; classes are ordered by that representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyPartition {
    pub classes: Vec<Vec<GroupElement>>,
}

impl ConjugacyPartition {
    pub fn class_of(&self, g: &GroupElement) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(g))
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Union-find closure of the elements under conjugation by the listed conjugators.
///
/// Classes are distinct only within the tested conjugators: a longer list may merge them.
pub fn classify_conjugacy(
    elements: &[GroupElement],
    conjugators: &[GroupElement],
) -> Result<ConjugacyPartition, ArithError> {
    if let Some(first) = elements.first() {
        if let Some(bad) = elements.iter().find(|g| g.y[0] != first.y[0]) {
            return Err(ArithError::MixedTraces(first.y[0], bad.y[0]));
        }
    }
    let index: HashMap<Quad, usize> = elements.iter().enumerate().map(|(i, g)| (g.y, i)).collect();
    let mut parent: Vec<usize> = (0..elements.len()).collect();
    for (i, e) in elements.iter().enumerate() {
        for g in conjugators {
            let c = e.conjugate_by(g)?;
            if let Some(&j) = index.get(&c.y) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<GroupElement>> = HashMap::new();
    for i in 0..elements.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(elements[i]);
    }
    let mut classes: Vec<Vec<GroupElement>> = groups
        .into_values()
        .map(|mut c| {
            c.sort_by_key(|g| g.y);
            c
        })
        .collect();
    classes.sort_by_key(|c| c[0].y);
    Ok(ConjugacyPartition { classes })
}

/// Chebyshev `T_k(m)`, the half-trace of the `k`-th power of an element of half-trace `m`.
pub fn chebyshev(k: u32, m: i64) -> Option<i64> {
    let (mut t0, mut t1) = (1i128, m as i128);
    if k == 0 {
        return Some(1);
    }
    for _ in 1..k {
        let t2 = 2 * (m as i128) * t1 - t0;
        t0 = t1;
        t1 = t2;
        if t1.abs() > i64::MAX as i128 {
            return None;
        }
    }
    Some(t1 as i64)
}
