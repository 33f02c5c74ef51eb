//! Sparse multivariate polynomials over arbitrary-precision rationals.
//!
//! A [`Polynomial`] owns an ordered list of variable names (its universe)
//! and a term list sorted in descending graded lexicographic order with
//! respect to that list.  Universes are always kept in natural name order
//! (`x2` before `x10`), so polynomials over different universes combine by
//! a plain sorted merge.  Equality is mathematical: universes are aligned
//! before term maps are compared, so `x1` over `[x1]` equals `x1` over
//! `[x1, x2]`.
//!
//! Division is exact division: [`Polynomial::divide_exact`] returns the
//! quotient when the remainder is zero and reports [`Division::NotDivisible`]
//! as an ordinary value otherwise.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational scalar used for every coefficient.
pub type Rat = BigRational;

/// Assignment of rational values to variable names.
pub type RationalPoint = BTreeMap<String, Rat>;

/// Errors reported by polynomial operations.
#[derive(Debug, Error)]
pub enum PolyError {
    /// `evaluate` was called with a point that misses a needed variable.
    #[error("no binding for variable `{0}`")]
    MissingBinding(String),
    /// `divide_exact` was called with the zero polynomial as divisor.
    #[error("division by the zero polynomial")]
    DivisionByZero,
    /// A string could not be parsed as a polynomial or rational.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Outcome of exact division.
#[derive(Debug, Clone, PartialEq)]
pub enum Division {
    /// The divisor divides exactly; the quotient is returned.
    Exact(Polynomial),
    /// The division leaves a nonzero remainder.
    NotDivisible,
}

impl Division {
    /// The quotient, if the division was exact.
    pub fn quotient(self) -> Option<Polynomial> {
        match self {
            Division::Exact(q) => Some(q),
            Division::NotDivisible => None,
        }
    }
}

/// Compares variable names naturally: runs of digits compare by value, so
/// `x2` sorts before `x10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (ab, bb) = (a.as_bytes(), b.as_bytes());
    let (mut i, mut j) = (0, 0);
    while i < ab.len() && j < bb.len() {
        let (ca, cb) = (ab[i], bb[j]);
        if ca.is_ascii_digit() && cb.is_ascii_digit() {
            let si = i;
            while i < ab.len() && ab[i].is_ascii_digit() {
                i += 1;
            }
            let sj = j;
            while j < bb.len() && bb[j].is_ascii_digit() {
                j += 1;
            }
            let da = a[si..i].trim_start_matches('0');
            let db = b[sj..j].trim_start_matches('0');
            let ord = da.len().cmp(&db.len()).then_with(|| da.cmp(db));
            if ord != Ordering::Equal {
                return ord;
            }
        } else {
            let ord = ca.cmp(&cb);
            if ord != Ordering::Equal {
                return ord;
            }
            i += 1;
            j += 1;
        }
    }
    (ab.len() - i).cmp(&(bb.len() - j))
}

/// Graded lexicographic comparison of exponent vectors of equal length.
fn grlex_cmp(a: &[u16], b: &[u16]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// Sparse polynomial with rational coefficients.
///
/// Invariants: every exponent vector has length `vars.len()`, terms are
/// sorted in strictly descending graded lexicographic order, and no stored
/// coefficient is zero.
#[derive(Debug, Clone)]
pub struct Polynomial {
    vars: Vec<String>,
    terms: Vec<(Vec<u16>, Rat)>,
}

impl Polynomial {
    /// The zero polynomial over the empty universe.
    pub fn zero() -> Self {
        Polynomial { vars: Vec::new(), terms: Vec::new() }
    }

    /// A constant polynomial.
    pub fn constant(c: Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Polynomial { vars: Vec::new(), terms: vec![(Vec::new(), c)] }
    }

    /// A constant polynomial from an integer.
    pub fn from_int(n: i64) -> Self {
        Self::constant(Rat::from_integer(BigInt::from(n)))
    }

    /// The polynomial `name` over the universe `[name]`.
    pub fn var(name: &str) -> Self {
        Polynomial { vars: vec![name.to_string()], terms: vec![(vec![1], Rat::one())] }
    }

    /// Builds a polynomial from a term map over an explicit universe, given
    /// in natural name order.  Exponent vectors must match the universe
    /// length.
    pub fn from_terms(vars: Vec<String>, map: BTreeMap<Vec<u16>, Rat>) -> Self {
        assert!(
            vars.windows(2).all(|w| natural_cmp(&w[0], &w[1]) == Ordering::Less),
            "universe must be strictly natural-sorted: {vars:?}"
        );
        let mut terms: Vec<(Vec<u16>, Rat)> = map
            .into_iter()
            .filter(|(e, c)| {
                assert_eq!(e.len(), vars.len(), "exponent vector length mismatch");
                !c.is_zero()
            })
            .collect();
        terms.sort_by(|(a, _), (b, _)| grlex_cmp(b, a));
        Polynomial { vars, terms }
    }

    /// True when the polynomial has no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the polynomial is a nonzero constant.
    pub fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.iter().all(|&e| e == 0)
    }

    /// The constant value, when the polynomial is constant (or zero).
    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(Rat::zero());
        }
        if self.is_constant() {
            return Some(self.terms[0].1.clone());
        }
        None
    }

    /// Declared variable universe, in order.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Variables that actually occur with a nonzero exponent.
    pub fn support(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (exps, _) in &self.terms {
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    out.insert(self.vars[i].clone());
                }
            }
        }
        out
    }

    /// Total degree; zero for the zero polynomial.
    pub fn total_degree(&self) -> u64 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().map(|&x| x as u64).sum())
            .max()
            .unwrap_or(0)
    }

    /// Iterates over terms as (exponents, coefficient), leading term first.
    pub fn terms(&self) -> impl Iterator<Item = (&[u16], &Rat)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// Number of stored terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Merges two natural-sorted universes into their sorted union.
    fn merge_vars(a: &[String], b: &[String]) -> Vec<String> {
        if a == b || b.is_empty() {
            return a.to_vec();
        }
        if a.is_empty() {
            return b.to_vec();
        }
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if i == a.len() {
                out.push(b[j].clone());
                j += 1;
            } else if j == b.len() {
                out.push(a[i].clone());
                i += 1;
            } else {
                match natural_cmp(&a[i], &b[j]) {
                    Ordering::Less => {
                        out.push(a[i].clone());
                        i += 1;
                    }
                    Ordering::Greater => {
                        out.push(b[j].clone());
                        j += 1;
                    }
                    Ordering::Equal => {
                        out.push(a[i].clone());
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        out
    }

    /// Re-expresses the polynomial over a universe that contains its own.
    fn align_to(&self, vars: &[String]) -> Polynomial {
        if self.vars == vars {
            return self.clone();
        }
        let pos: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).expect("universe must contain all variables"))
            .collect();
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut ne = vec![0u16; vars.len()];
                for (i, &x) in e.iter().enumerate() {
                    ne[pos[i]] = x;
                }
                (ne, c.clone())
            })
            .collect::<Vec<_>>();
        let mut out = Polynomial { vars: vars.to_vec(), terms };
        out.terms.sort_by(|(a, _), (b, _)| grlex_cmp(b, a));
        out
    }

    fn add_signed(&self, other: &Polynomial, negate: bool) -> Polynomial {
        let vars = Self::merge_vars(&self.vars, &other.vars);
        let a = self.align_to(&vars);
        let b = other.align_to(&vars);
        let mut terms = Vec::with_capacity(a.terms.len() + b.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < a.terms.len() || j < b.terms.len() {
            let pick = if i == a.terms.len() {
                Ordering::Less
            } else if j == b.terms.len() {
                Ordering::Greater
            } else {
                grlex_cmp(&a.terms[i].0, &b.terms[j].0)
            };
            match pick {
                Ordering::Greater => {
                    terms.push(a.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let (e, c) = b.terms[j].clone();
                    terms.push((e, if negate { -c } else { c }));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate {
                        &a.terms[i].1 - &b.terms[j].1
                    } else {
                        &a.terms[i].1 + &b.terms[j].1
                    };
                    if !c.is_zero() {
                        terms.push((a.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Polynomial { vars, terms }
    }

    fn mul_impl(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let vars = Self::merge_vars(&self.vars, &other.vars);
        let a = self.align_to(&vars);
        let b = other.align_to(&vars);
        let nv = vars.len();
        // Fast path: pack exponent vectors into a u128 whose integer order
        // is the graded lexicographic order.  Safe when per-variable and
        // total degrees of the product stay within the packed field widths.
        let fits = nv <= 14
            && Self::max_per_var(&a)
                .iter()
                .zip(Self::max_per_var(&b).iter())
                .all(|(&x, &y)| (x as u32) + (y as u32) < 256)
            && a.total_degree() + b.total_degree() < 65536;
        let mut terms: Vec<(Vec<u16>, Rat)>;
        if fits {
            let pack = |e: &[u16]| -> u128 {
                let deg: u128 = e.iter().map(|&x| x as u128).sum();
                let mut k = deg << 112;
                for (i, &x) in e.iter().enumerate() {
                    k |= (x as u128) << (104 - 8 * i);
                }
                k
            };
            let unpack = |k: u128| -> Vec<u16> {
                (0..nv).map(|i| ((k >> (104 - 8 * i)) & 0xff) as u16).collect()
            };
            let pa: Vec<(u128, &Rat)> = a.terms.iter().map(|(e, c)| (pack(e), c)).collect();
            let pb: Vec<(u128, &Rat)> = b.terms.iter().map(|(e, c)| (pack(e), c)).collect();
            let mut acc: HashMap<u128, Rat> =
                HashMap::with_capacity(pa.len().saturating_mul(pb.len()).min(1 << 22));
            for (ka, ca) in &pa {
                for (kb, cb) in &pb {
                    let prod = (*ca) * (*cb);
                    match acc.entry(ka + kb) {
                        std::collections::hash_map::Entry::Occupied(mut o) => {
                            *o.get_mut() += prod;
                        }
                        std::collections::hash_map::Entry::Vacant(v) => {
                            v.insert(prod);
                        }
                    }
                }
            }
            let mut packed: Vec<(u128, Rat)> =
                acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            packed.sort_unstable_by(|(x, _), (y, _)| y.cmp(x));
            terms = packed.into_iter().map(|(k, c)| (unpack(k), c)).collect();
        } else {
            let mut acc: BTreeMap<Vec<u16>, Rat> = BTreeMap::new();
            for (ea, ca) in &a.terms {
                for (eb, cb) in &b.terms {
                    let e: Vec<u16> =
                        ea.iter().zip(eb.iter()).map(|(&x, &y)| x.checked_add(y).unwrap()).collect();
                    let prod = ca * cb;
                    *acc.entry(e).or_insert_with(Rat::zero) += prod;
                }
            }
            terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            terms.sort_by(|(x, _), (y, _)| grlex_cmp(y, x));
        }
        Polynomial { vars, terms }
    }

    fn max_per_var(p: &Polynomial) -> Vec<u16> {
        let mut m = vec![0u16; p.vars.len()];
        for (e, _) in &p.terms {
            for (i, &x) in e.iter().enumerate() {
                m[i] = m[i].max(x);
            }
        }
        m
    }

    /// Raises the polynomial to a non-negative power by repeated squaring.
    pub fn pow(&self, mut n: u32) -> Polynomial {
        let mut base = self.clone();
        let mut out = Polynomial::from_int(1);
        while n > 0 {
            if n & 1 == 1 {
                out = out.mul_impl(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_impl(&base);
            }
        }
        out
    }

    /// Multiplies by a rational scalar.
    pub fn scale(&self, c: &Rat) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    /// Partial derivative with respect to `var`.  Differentiating by a
    /// variable outside the universe yields zero.
    pub fn partial(&self, var: &str) -> Polynomial {
        let Some(idx) = self.vars.iter().position(|v| v == var) else {
            return Polynomial::zero();
        };
        let terms: Vec<(Vec<u16>, Rat)> = self
            .terms
            .iter()
            .filter(|(e, _)| e[idx] > 0)
            .map(|(e, c)| {
                let mut ne = e.clone();
                let k = ne[idx];
                ne[idx] = k - 1;
                (ne, c * Rat::from_integer(BigInt::from(k)))
            })
            .collect();
        debug_assert!(terms.windows(2).all(|w| grlex_cmp(&w[0].0, &w[1].0) == Ordering::Greater));
        Polynomial { vars: self.vars.clone(), terms }
    }

    /// Substitutes polynomials for variables.  Variables without an entry
    /// in `map` are left in place.
    pub fn substitute(&self, map: &BTreeMap<String, Polynomial>) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        if !self.vars.iter().any(|v| map.contains_key(v)) {
            return self.clone();
        }
        // Cache powers of each replaced variable's image.
        let maxes = Self::max_per_var(self);
        let mut powers: HashMap<usize, Vec<Polynomial>> = HashMap::new();
        for (i, v) in self.vars.iter().enumerate() {
            if let Some(img) = map.get(v) {
                let mut tower = vec![Polynomial::from_int(1)];
                for _ in 0..maxes[i] {
                    let next = tower.last().unwrap().mul_impl(img);
                    tower.push(next);
                }
                powers.insert(i, tower);
            }
        }
        let mut out = Polynomial::zero();
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(c.clone());
            let mut kept: Vec<u16> = vec![0; self.vars.len()];
            for (i, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if let Some(tower) = powers.get(&i) {
                    term = term.mul_impl(&tower[x as usize]);
                } else {
                    kept[i] = x;
                }
            }
            if kept.iter().any(|&x| x > 0) {
                let mono = Polynomial {
                    vars: self.vars.clone(),
                    terms: vec![(kept, Rat::one())],
                };
                term = term.mul_impl(&mono);
            }
            out = out.add_signed(&term, false);
        }
        out
    }

    /// Renames variables.  Entries absent from `map` keep their names.
    /// The renaming must stay injective on the universe.
    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Polynomial {
        let vars: Vec<String> =
            self.vars.iter().map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone())).collect();
        let distinct: BTreeSet<&String> = vars.iter().collect();
        assert_eq!(distinct.len(), vars.len(), "renaming must be injective");
        let out = Polynomial { vars, terms: self.terms.clone() };
        // The new names may order differently; restore the sorted universe.
        let mut sorted = out.vars.clone();
        sorted.sort_by(|a, b| natural_cmp(a, b));
        out.align_to(&sorted)
    }

    /// Replaces each listed variable `v` by `-v`.
    pub fn flip_vars(&self, flips: &BTreeSet<String>) -> Polynomial {
        let idx: Vec<usize> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| flips.contains(*v))
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let odd: u32 = idx.iter().map(|&i| e[i] as u32).sum();
                (e.clone(), if odd % 2 == 1 { -c.clone() } else { c.clone() })
            })
            .collect();
        Polynomial { vars: self.vars.clone(), terms }
    }

    /// Evaluates at a rational point.  Every variable in the support must
    /// be bound.
    pub fn evaluate(&self, point: &RationalPoint) -> Result<Rat, PolyError> {
        let mut values: Vec<Option<&Rat>> = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            values.push(point.get(v));
        }
        let maxes = Self::max_per_var(self);
        let mut towers: Vec<Vec<Rat>> = Vec::with_capacity(self.vars.len());
        for (i, val) in values.iter().enumerate() {
            let mut tower = vec![Rat::one()];
            if maxes[i] > 0 {
                if let Some(v) = val {
                    for _ in 0..maxes[i] {
                        let next = tower.last().unwrap() * *v;
                        tower.push(next);
                    }
                } else {
                    return Err(PolyError::MissingBinding(self.vars[i].clone()));
                }
            }
            towers.push(tower);
        }
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    t *= &towers[i][x as usize];
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Leading term in graded lexicographic order, as (exponents, coefficient).
    pub fn leading_term(&self) -> Option<(&[u16], &Rat)> {
        self.terms.first().map(|(e, c)| (e.as_slice(), c))
    }

    /// Exact division.  Returns the quotient when `self = q * divisor`
    /// exactly, [`Division::NotDivisible`] otherwise, and an error for a
    /// zero divisor.
    pub fn divide_exact(&self, divisor: &Polynomial) -> Result<Division, PolyError> {
        if divisor.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        let vars = Self::merge_vars(&self.vars, &divisor.vars);
        let b = divisor.align_to(&vars);
        let mut rem: BTreeMap<GrlexKey, Rat> = BTreeMap::new();
        for (e, c) in self.align_to(&vars).terms {
            rem.insert(GrlexKey(e), c);
        }
        let (lb, cb) = (&b.terms[0].0, &b.terms[0].1);
        let mut q: BTreeMap<Vec<u16>, Rat> = BTreeMap::new();
        while let Some((GrlexKey(la), ca)) = rem.iter().next_back().map(|(k, c)| (k.clone(), c.clone()))
        {
            // Leading exponent of the remainder must be divisible by the
            // divisor's leading exponent, or the division fails.
            let mut qe = vec![0u16; vars.len()];
            let mut ok = true;
            for i in 0..vars.len() {
                if la[i] < lb[i] {
                    ok = false;
                    break;
                }
                qe[i] = la[i] - lb[i];
            }
            if !ok {
                return Ok(Division::NotDivisible);
            }
            let qc = &ca / cb;
            // rem -= qc * x^qe * b
            for (e, c) in &b.terms {
                let me: Vec<u16> = e.iter().zip(qe.iter()).map(|(&x, &y)| x + y).collect();
                let delta = c * &qc;
                let key = GrlexKey(me);
                let entry = rem.entry(key).or_insert_with(Rat::zero);
                *entry -= delta;
                if entry.is_zero() {
                    // Re-borrow to remove the zero entry.
                    let k = GrlexKey(e.iter().zip(qe.iter()).map(|(&x, &y)| x + y).collect());
                    rem.remove(&k);
                }
            }
            q.insert(qe, qc);
        }
        Ok(Division::Exact(Polynomial::from_terms(vars, q)))
    }

    /// Product of a sequence of polynomials, multiplying small factors
    /// first to keep intermediates compact.
    pub fn product<I: IntoIterator<Item = Polynomial>>(factors: I) -> Polynomial {
        let mut fs: Vec<Polynomial> = factors.into_iter().collect();
        if fs.is_empty() {
            return Polynomial::from_int(1);
        }
        fs.sort_by_key(|p| p.term_count());
        let mut acc = fs[0].clone();
        for f in &fs[1..] {
            acc = acc.mul_impl(f);
        }
        acc
    }

    /// Parses the canonical text form produced by [`fmt::Display`].
    pub fn parse(input: &str) -> Result<Polynomial, PolyError> {
        Parser::new(input).parse_all()
    }
}

/// Wrapper giving `Vec<u16>` the graded lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
struct GrlexKey(Vec<u16>);

impl Ord for GrlexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        grlex_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for GrlexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        if self.vars == other.vars {
            return self.terms == other.terms;
        }
        let vars = Self::merge_vars(&self.vars, &other.vars);
        self.align_to(&vars).terms == other.align_to(&vars).terms
    }
}

impl Eq for Polynomial {}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.add_signed(rhs, false)
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.add_signed(rhs, true)
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.mul_impl(rhs)
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }
}

impl std::ops::Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl std::ops::Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl std::ops::Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl std::ops::Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let factors: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| {
                    if x == 1 {
                        self.vars[i].clone()
                    } else {
                        format!("{}^{}", self.vars[i], x)
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{}", format_rat(&abs))?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rat(&abs), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a rational written as `p` or `p/q`.
pub fn parse_rat(s: &str) -> Result<Rat, PolyError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n = BigInt::from_str(num).map_err(|e| PolyError::Parse(format!("bad integer `{num}`: {e}")))?;
    let d = match den {
        Some(d) => BigInt::from_str(d).map_err(|e| PolyError::Parse(format!("bad integer `{d}`: {e}")))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(PolyError::Parse("zero denominator".into()));
    }
    Ok(Rat::new(n, d))
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser { bytes: input.as_bytes(), pos: 0 }
    }

    fn parse_all(&mut self) -> Result<Polynomial, PolyError> {
        let p = self.expr()?;
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return Err(PolyError::Parse(format!("unexpected input at byte {}", self.pos)));
        }
        Ok(p)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.factor()?;
        while let Some(b'*') = self.peek() {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.atom()?;
        if let Some(b'^') = self.peek() {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(PolyError::Parse("expected exponent after `^`".into()));
            }
            let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
            let e: u32 = text.parse().map_err(|_| PolyError::Parse(format!("bad exponent `{text}`")))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(PolyError::Parse("expected `)`".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.factor()?)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                // Optional `/q` for rational constants.
                let mut end = self.pos;
                let save = self.pos;
                self.skip_ws();
                if self.bytes.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let dstart = self.pos;
                    while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if dstart == self.pos {
                        return Err(PolyError::Parse("expected denominator after `/`".into()));
                    }
                    let num = std::str::from_utf8(&self.bytes[start..end]).unwrap();
                    let den = std::str::from_utf8(&self.bytes[dstart..self.pos]).unwrap();
                    return Ok(Polynomial::constant(parse_rat(&format!("{num}/{den}"))?));
                }
                self.pos = save;
                end = save;
                let text = std::str::from_utf8(&self.bytes[start..end]).unwrap();
                Ok(Polynomial::constant(parse_rat(text)?))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                Ok(Polynomial::var(name))
            }
            other => Err(PolyError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent model: polynomials as name->exponent maps with i128
    /// coefficients, combined by naive map arithmetic.
    type ModelTerm = BTreeMap<String, u32>;
    type Model = BTreeMap<ModelTerm, i128>;

    fn model_add(a: &Model, b: &Model) -> Model {
        let mut out = a.clone();
        for (m, c) in b {
            let e = out.entry(m.clone()).or_insert(0);
            *e += c;
            if *e == 0 {
                out.remove(m);
            }
        }
        out
    }

    fn model_mul(a: &Model, b: &Model) -> Model {
        let mut out = Model::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                let mut m = ma.clone();
                for (v, e) in mb {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                let entry = out.entry(m).or_insert(0);
                *entry += ca * cb;
            }
        }
        out.retain(|_, c| *c != 0);
        out
    }

    fn to_model(p: &Polynomial) -> Model {
        let mut out = Model::new();
        for (e, c) in p.terms() {
            assert!(c.denom().is_one(), "model only covers integer coefficients");
            let mut m = ModelTerm::new();
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    m.insert(p.vars()[i].clone(), x as u32);
                }
            }
            let v: i128 = c.numer().to_string().parse().unwrap();
            out.insert(m, v);
        }
        out
    }

    fn h2() -> Polynomial {
        // x1 - x2^2
        &Polynomial::var("x1") - &Polynomial::var("x2").pow(2)
    }

    fn h3() -> Polynomial {
        // x1 - (x2 - x3^2)^2
        let inner = &Polynomial::var("x2") - &Polynomial::var("x3").pow(2);
        &Polynomial::var("x1") - &inner.pow(2)
    }

    #[test]
    fn add_matches_term_map_oracle() {
        let sum = &h2() + &h2();
        let expected = model_add(&to_model(&h2()), &to_model(&h2()));
        assert_eq!(to_model(&sum), expected);
        assert_eq!(sum.to_string(), "-2*x2^2 + 2*x1");
    }

    #[test]
    fn mul_matches_convolution_oracle() {
        let sq = &h2() * &h2();
        let expected = model_mul(&to_model(&h2()), &to_model(&h2()));
        assert_eq!(to_model(&sq), expected);
        assert_eq!(sq.to_string(), "x2^4 - 2*x1*x2^2 + x1^2");
    }

    #[test]
    fn partial_of_h2_squared() {
        // d(h2^2)/dx1 = 2*h2
        let sq = h2().pow(2);
        let got = sq.partial("x1");
        let expected = h2().scale(&Rat::from_integer(2.into()));
        assert_eq!(got, expected);
    }

    #[test]
    fn partial_of_h3_squared() {
        // d(h3^2)/dx2 = -4*h3*(x2 - x3^2)
        let sq = h3().pow(2);
        let got = sq.partial("x2");
        let inner = &Polynomial::var("x2") - &Polynomial::var("x3").pow(2);
        let expected = (&h3() * &inner).scale(&Rat::from_integer((-4).into()));
        assert_eq!(got, expected);
    }

    #[test]
    fn partials_commute() {
        let sq = h3().pow(2);
        let a = sq.partial("x1").partial("x3");
        let b = sq.partial("x3").partial("x1");
        assert_eq!(a, b);
    }

    #[test]
    fn divide_exact_recovers_quotient() {
        // (h2^2 - h2) / h2 = h2 - 1, checked by multiplying back.
        let numer = &h2().pow(2) - &h2();
        let q = match numer.divide_exact(&h2()).unwrap() {
            Division::Exact(q) => q,
            Division::NotDivisible => panic!("expected exact division"),
        };
        assert_eq!(q, &h2() - &Polynomial::from_int(1));
        assert_eq!(&q * &h2(), numer);
    }

    #[test]
    fn divide_exact_rejects_non_divisor() {
        let p = &h2() + &Polynomial::from_int(1);
        match p.divide_exact(&Polynomial::var("x2")).unwrap() {
            Division::NotDivisible => {}
            Division::Exact(q) => panic!("unexpected quotient {q}"),
        }
    }

    #[test]
    fn divide_by_zero_is_an_error() {
        match h2().divide_exact(&Polynomial::zero()) {
            Err(PolyError::DivisionByZero) => {}
            other => panic!("expected DivisionByZero, got {other:?}"),
        }
    }

    #[test]
    fn evaluate_h_values() {
        let mut p = RationalPoint::new();
        p.insert("x1".into(), Rat::from_integer(1.into()));
        p.insert("x2".into(), Rat::from_integer(2.into()));
        p.insert("x3".into(), Rat::from_integer(1.into()));
        assert_eq!(h3().evaluate(&p).unwrap(), Rat::zero());
        let mut q = RationalPoint::new();
        q.insert("x1".into(), Rat::from_integer(3.into()));
        q.insert("x2".into(), Rat::from_integer(1.into()));
        assert_eq!(h2().evaluate(&q).unwrap(), Rat::from_integer(2.into()));
    }

    #[test]
    fn evaluate_reports_missing_binding() {
        let p = RationalPoint::new();
        match h2().evaluate(&p) {
            Err(PolyError::MissingBinding(v)) => assert_eq!(v, "x1"),
            other => panic!("expected MissingBinding, got {other:?}"),
        }
    }

    #[test]
    fn grlex_order_is_degree_then_lex() {
        // x1^2 > x1*x2 > x2^2 > x1 > x2 > 1 over [x1, x2]
        let p = Polynomial::parse("1 + x2 + x1 + x2^2 + x1*x2 + x1^2").unwrap();
        let shown = p.to_string();
        assert_eq!(shown, "x1^2 + x1*x2 + x2^2 + x1 + x2 + 1");
    }

    #[test]
    fn display_parse_round_trip() {
        let p = Polynomial::parse("-1/2*x1*x2^2 + 3*x3 - 7/3").unwrap();
        let q = Polynomial::parse(&p.to_string()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn universes_merge_mathematically() {
        // x1 over [x1] equals x1 over a larger universe.
        let a = Polynomial::var("x1");
        let b = &(&Polynomial::var("x1") + &Polynomial::var("x2")) - &Polynomial::var("x2");
        assert_eq!(a, b);
        assert_eq!(b.support(), BTreeSet::from(["x1".to_string()]));
    }

    #[test]
    fn natural_order_in_merges() {
        let a = Polynomial::var("x2");
        let b = Polynomial::var("x10");
        let s = &a + &b;
        assert_eq!(s.vars(), &["x2".to_string(), "x10".to_string()]);
    }

    #[test]
    fn flip_vars_flips_odd_exponents() {
        let p = h2();
        let flipped = p.flip_vars(&BTreeSet::from(["x2".to_string()]));
        assert_eq!(flipped, h2()); // x2 appears squared only
        let all = p.flip_vars(&BTreeSet::from(["x1".to_string(), "x2".to_string()]));
        assert_eq!(all, -&(&Polynomial::var("x1") + &Polynomial::var("x2").pow(2)));
    }

    #[test]
    fn rename_reorders_canonically() {
        let p = h2().rename_vars(&BTreeMap::from([
            ("x1".to_string(), "x_b".to_string()),
            ("x2".to_string(), "x_a".to_string()),
        ]));
        assert_eq!(p.vars(), &["x_a".to_string(), "x_b".to_string()]);
        assert_eq!(p.to_string(), "-x_a^2 + x_b");
    }

    #[test]
    fn rational_format_round_trip() {
        for s in ["3", "-3", "1/2", "-7/3", "0"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_rat() -> impl Strategy<Value = Rat> {
            (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Rat::new(BigInt::from(n), BigInt::from(d)))
        }

        fn arb_poly() -> impl Strategy<Value = Polynomial> {
            let term = (prop::collection::vec(0u16..3, 3), arb_rat());
            prop::collection::vec(term, 0..6).prop_map(|terms| {
                let vars = vec!["x1".to_string(), "x2".to_string(), "x3".to_string()];
                let mut map: BTreeMap<Vec<u16>, Rat> = BTreeMap::new();
                for (e, c) in terms {
                    let entry = map.entry(e).or_insert_with(Rat::zero);
                    *entry += c;
                }
                map.retain(|_, c| !c.is_zero());
                Polynomial::from_terms(vars, map)
            })
        }

        proptest! {
            #[test]
            fn addition_commutes(a in arb_poly(), b in arb_poly()) {
                prop_assert_eq!(&a + &b, &b + &a);
            }

            #[test]
            fn addition_associates(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
                prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            }

            #[test]
            fn multiplication_commutes(a in arb_poly(), b in arb_poly()) {
                prop_assert_eq!(&a * &b, &b * &a);
            }

            #[test]
            fn distributivity(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
                prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            }

            #[test]
            fn divide_exact_inverts_mul(a in arb_poly(), b in arb_poly()) {
                prop_assume!(!b.is_zero());
                let prod = &a * &b;
                match prod.divide_exact(&b).unwrap() {
                    Division::Exact(q) => prop_assert_eq!(q, a),
                    Division::NotDivisible => prop_assert!(false, "product must divide"),
                }
            }

            #[test]
            fn evaluation_is_a_homomorphism(a in arb_poly(), b in arb_poly()) {
                let mut pt = RationalPoint::new();
                pt.insert("x1".into(), Rat::new(BigInt::from(2), BigInt::from(3)));
                pt.insert("x2".into(), Rat::new(BigInt::from(-1), BigInt::from(2)));
                pt.insert("x3".into(), Rat::from_integer(2.into()));
                let lhs = (&a * &b).evaluate(&pt).unwrap();
                let rhs = a.evaluate(&pt).unwrap() * b.evaluate(&pt).unwrap();
                prop_assert_eq!(lhs, rhs);
                let lhs = (&a + &b).evaluate(&pt).unwrap();
                let rhs = a.evaluate(&pt).unwrap() + b.evaluate(&pt).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn display_round_trips(a in arb_poly()) {
                let shown = a.to_string();
                let back = Polynomial::parse(&shown).unwrap();
                prop_assert_eq!(back, a);
            }

            #[test]
            fn partial_commutes(a in arb_poly()) {
                prop_assert_eq!(
                    a.partial("x1").partial("x2"),
                    a.partial("x2").partial("x1")
                );
            }

            #[test]
            fn flip_is_an_involution(a in arb_poly()) {
                let f = BTreeSet::from(["x1".to_string(), "x3".to_string()]);
                prop_assert_eq!(a.flip_vars(&f).flip_vars(&f), a);
            }
        }
    }
}
