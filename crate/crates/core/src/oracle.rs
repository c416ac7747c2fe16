//! Exact and brute-force counterparts used to verify the propagation layer:
//! combinations with repetition, the closed-form wave function, the
//! stationary closed form, rational identities for the oscillatory-order
//! help function, surviving-bracket counting, the annihilation sign check
//! and the pyramid sum-reordering identities.
//!
//! Counting and identity checks run in exact arithmetic; nothing here is
//! allowed to truncate silently, capacity limits are hard errors.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::grid::{inner_product, TwoComponentWaveFunction};
use crate::propagator::{apply_swap_coupling, CouplingOperator, StepOperator, SystemHamiltonian};

/// Exact rational number; reduced form with positive denominator.
pub type Rational = BigRational;

/// Assignment of `m` interaction events to `n` time slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinationVector {
    pub components: Vec<u32>,
}

pub fn big_factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

pub fn big_binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of combinations with repetition, `C(n + m - 1, m)`.
pub fn combinations_count(n: u64, m: u64) -> Result<u64> {
    let big = big_binomial(n + m - 1, m);
    big.to_u64().filter(|&v| v <= (1u64 << 63)).ok_or_else(|| {
        Error::Capacity(format!(
            "combination count C({}, {m}) exceeds 2^63",
            n + m - 1
        ))
    })
}

/// Visit every vector of `n` non-negative integers summing to `m`, first
/// component descending (the order the sums are usually written out in).
pub fn for_each_combination<F: FnMut(&[u32])>(n: usize, m: u32, mut f: F) {
    assert!(n >= 1);
    let mut buf = vec![0u32; n];
    fn rec<F: FnMut(&[u32])>(buf: &mut Vec<u32>, slot: usize, remaining: u32, f: &mut F) {
        if slot == buf.len() - 1 {
            buf[slot] = remaining;
            f(buf);
            return;
        }
        for v in (0..=remaining).rev() {
            buf[slot] = v;
            rec(buf, slot + 1, remaining - v, f);
        }
    }
    rec(&mut buf, 0, m, &mut f);
}

/// Materialised list of all combination vectors.
pub fn combinations_with_repetition(n: usize, m: u32) -> Result<Vec<CombinationVector>> {
    if n < 1 {
        return Err(Error::Usage("need at least one slot".into()));
    }
    let count = combinations_count(n as u64, m as u64)?;
    if count > 10_000_000 {
        return Err(Error::Capacity(format!(
            "refusing to materialise {count} combination vectors"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    for_each_combination(n, m, |v| {
        out.push(CombinationVector {
            components: v.to_vec(),
        })
    });
    Ok(out)
}

/// Direct evaluation of the closed-form truncated wave function after `n`
/// steps: for every order `m <= k` and every assignment of `m` coupling
/// events to the `n` steps, apply the operator string to the initial state
/// and accumulate with the `(-i dt)^m` prefactor.
pub fn closed_form_wavefunction(
    n: usize,
    k: usize,
    dt: f64,
    h: &SystemHamiltonian,
    coupling: &CouplingOperator,
    psi_init: &TwoComponentWaveFunction,
) -> Result<TwoComponentWaveFunction> {
    if n > 8 || k > 5 {
        return Err(Error::Capacity(format!(
            "closed form limited to n <= 8, k <= 5 (got n = {n}, k = {k})"
        )));
    }
    if n == 0 {
        return Ok(psi_init.clone());
    }
    let step = StepOperator::new(h, dt);
    let w_at: Vec<f64> = (1..=n)
        .map(|j| coupling.coupling_at(j as f64 * dt))
        .collect();
    let mut sum = TwoComponentWaveFunction::zeros(psi_init.grid.clone());
    for m in 0..=k as u32 {
        let prefactor = Complex64::new(0.0, -dt).powu(m);
        for_each_combination(n, m, |nu| {
            let mut psi = psi_init.clone();
            for slot in 0..n {
                step.apply(&mut psi);
                for _ in 0..nu[slot] {
                    psi = apply_swap_coupling(w_at[slot], &psi);
                }
            }
            sum.add_scaled(prefactor, &psi);
        });
    }
    Ok(sum)
}

/// Stationary norm order from its closed form:
/// `(-1)^m dt^(2m) Σ_ν Π_j W(j)^(2 ν_j)` over all assignments of `m` events
/// to the `n` field samples `w_values`.
pub fn stationary_closed_form(n: usize, m: u32, dt: f64, w_values: &[f64]) -> Result<f64> {
    if m < 1 {
        return Err(Error::Usage("order m must be >= 1".into()));
    }
    if w_values.len() != n {
        return Err(Error::Usage(format!(
            "expected {n} field samples, got {}",
            w_values.len()
        )));
    }
    let count = combinations_count(n as u64, m as u64)?;
    if count > 10_000_000 {
        return Err(Error::Capacity(format!(
            "stationary closed form would enumerate {count} terms"
        )));
    }
    let w_sq: Vec<f64> = w_values.iter().map(|w| w * w).collect();
    // depth-first over slots with an incremental product
    fn rec(w_sq: &[f64], slot: usize, remaining: u32, acc: f64, sum: &mut f64) {
        if slot == w_sq.len() - 1 {
            *sum += acc * w_sq[slot].powi(remaining as i32);
            return;
        }
        for v in 0..=remaining {
            rec(
                w_sq,
                slot + 1,
                remaining - v,
                acc * w_sq[slot].powi(v as i32),
                sum,
            );
        }
    }
    let mut sum = 0.0;
    rec(&w_sq, 0, m, 1.0, &mut sum);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * dt.powi(2 * m as i32) * sum)
}

/// Help function for the oscillatory orders, evaluated from its defining
/// alternating sum. Terms whose factorial argument would be negative vanish.
pub fn xi_direct(m: u32, k: u32) -> Rational {
    assert!(m >= 1 && k >= m);
    let span = (k - m).min(m) as i64;
    let mut sum = Rational::zero();
    for j in -span..=span {
        let denom = big_factorial((m as i64 + j) as u64) * big_factorial((m as i64 - j) as u64);
        let term = Rational::new(BigInt::one(), denom);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

/// Closed form of the help function on the oscillatory window `k < 2m <= 2k`:
/// `(-1)^(k-m) / m · 1 / (k! (2m-1-k)!)`.
pub fn xi_closed(m: u32, k: u32) -> Result<Rational> {
    if !(k < 2 * m && 2 * m <= 2 * k) {
        return Err(Error::Domain(format!(
            "(m, k) = ({m}, {k}) outside the oscillatory window k < 2m <= 2k"
        )));
    }
    let denom = BigInt::from(m) * big_factorial(k as u64) * big_factorial((2 * m - 1 - k) as u64);
    let value = Rational::new(BigInt::one(), denom);
    Ok(if (k - m) % 2 == 0 { value } else { -value })
}

/// Net number of surviving bracket terms of an oscillatory order,
/// `|Σ_j (-1)^j C(n+j-1, j) C(n+2m-j-1, 2m-j)|` with `j` running over the
/// window `2m-k ..= k`.
pub fn surviving_bracket_count(n: u64, m: u32, k: u32) -> Result<BigInt> {
    if !(k < 2 * m && 2 * m <= 2 * k) {
        return Err(Error::Domain(format!(
            "(m, k) = ({m}, {k}) outside the oscillatory window k < 2m <= 2k"
        )));
    }
    let mut sum = BigInt::zero();
    for j in (2 * m - k)..=k {
        let term = big_binomial(n + j as u64 - 1, j as u64)
            * big_binomial(n + (2 * m - j) as u64 - 1, (2 * m - j) as u64);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(sum.abs())
}

/// Token of a canonicalised bracket operator string. `Prop(z)` stands for
/// `z` applications of the one-step system propagator (negative `z` for the
/// inverse); `Swap` is the bare component swap left over from a coupling
/// factor after its scalar part has been pulled out front.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Token {
    Prop(i32),
    Swap,
}

/// Canonical form of one bracket term: the total coupling power per time
/// slot (which fixes the pulled-out scalar) and the reduced operator word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct BracketKey {
    slot_powers: Vec<u16>,
    word: Vec<Token>,
}

fn reduce_word(tokens: impl IntoIterator<Item = Token>) -> Vec<Token> {
    let mut stack: Vec<Token> = Vec::new();
    for tok in tokens {
        let mut cur = Some(tok);
        while let Some(t) = cur.take() {
            match (stack.last().copied(), t) {
                (_, Token::Prop(0)) => {}
                (Some(Token::Prop(a)), Token::Prop(b)) => {
                    stack.pop();
                    cur = Some(Token::Prop(a + b));
                }
                (Some(Token::Swap), Token::Swap) => {
                    stack.pop();
                }
                _ => stack.push(t),
            }
        }
    }
    stack
}

/// Build the canonical bracket key for a bra assignment `nu` and a ket
/// assignment `rho` over `n` slots. A product of any two adjacent coupling
/// operators is a scalar, so only the parity of each power leaves a swap in
/// the word; the propagator factors on both sides then merge or cancel.
fn bracket_key(nu: &[u32], rho: &[u32]) -> BracketKey {
    let n = nu.len();
    let mut tokens: Vec<Token> = Vec::with_capacity(4 * n);
    // bra side: (U+ W(1)^nu1) (U+ W(2)^nu2) ... (U+ W(n)^nun)
    for q in 0..n {
        tokens.push(Token::Prop(1));
        if nu[q] % 2 == 1 {
            tokens.push(Token::Swap);
        }
    }
    // ket side: (W(n)^rho_n U-) (W(n-1)^rho_(n-1) U-) ... (W(1)^rho1 U-)
    for q in (0..n).rev() {
        if rho[q] % 2 == 1 {
            tokens.push(Token::Swap);
        }
        tokens.push(Token::Prop(-1));
    }
    let slot_powers = nu
        .iter()
        .zip(rho.iter())
        .map(|(a, b)| (a + b) as u16)
        .collect();
    BracketKey {
        slot_powers,
        word: reduce_word(tokens),
    }
}

/// Surviving bracket groups of one oscillatory order: canonical key plus the
/// net signed multiplicity accumulated over all `(j, ν, ρ)` summands.
pub struct SurvivorGroups {
    n: usize,
    m: u32,
    k: u32,
    groups: Vec<(BracketKey, i64)>,
}

fn guard_annihilation_args(n: usize, m: u32, k: u32) -> Result<()> {
    if !(k < 2 * m && 2 * m <= 2 * k) {
        return Err(Error::Domain(format!(
            "(m, k) = ({m}, {k}) outside the oscillatory window k < 2m <= 2k"
        )));
    }
    if n > 4 || 2 * m > 8 {
        return Err(Error::Capacity(format!(
            "annihilation enumeration limited to n <= 4 and 2m <= 8 (got n = {n}, 2m = {})",
            2 * m
        )));
    }
    Ok(())
}

/// Enumerate every bracket term of an oscillatory order, group identical
/// operator strings and accumulate their sign factors `(-1)^(m-j)`.
pub fn survivor_groups(n: usize, m: u32, k: u32) -> Result<SurvivorGroups> {
    guard_annihilation_args(n, m, k)?;
    let mut map: HashMap<BracketKey, i64> = HashMap::new();
    for j in (2 * m - k)..=k {
        let sign: i64 = if (m as i64 - j as i64).rem_euclid(2) == 0 {
            1
        } else {
            -1
        };
        let mut nus: Vec<Vec<u32>> = Vec::new();
        for_each_combination(n, j, |v| nus.push(v.to_vec()));
        let mut rhos: Vec<Vec<u32>> = Vec::new();
        for_each_combination(n, 2 * m - j, |v| rhos.push(v.to_vec()));
        for nu in &nus {
            for rho in &rhos {
                *map.entry(bracket_key(nu, rho)).or_insert(0) += sign;
            }
        }
    }
    let mut groups: Vec<(BracketKey, i64)> = map.into_iter().filter(|(_, net)| *net != 0).collect();
    // deterministic iteration order for downstream numeric sums
    groups.sort_by(|a, b| (&a.0.slot_powers, &a.0.word).cmp(&(&b.0.slot_powers, &b.0.word)));
    Ok(SurvivorGroups { n, m, k, groups })
}

impl SurvivorGroups {
    /// True when every surviving group carries the sign `(-1)^(k-m)`.
    pub fn all_share_expected_sign(&self) -> bool {
        let expect_positive = (self.k - self.m) % 2 == 0;
        self.groups
            .iter()
            .all(|(_, net)| (*net > 0) == expect_positive)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Sum of absolute net multiplicities, the total survivor count.
    pub fn total_count(&self) -> BigInt {
        self.groups
            .iter()
            .map(|(_, net)| BigInt::from(net.unsigned_abs()))
            .sum()
    }

    /// Evaluate the grouped sum numerically on a grid, reconstructing the
    /// oscillatory norm order. The propagator token is the same one-step
    /// split operator the simulation uses, so agreement is at rounding
    /// level.
    pub fn norm_order_value(
        &self,
        h: &SystemHamiltonian,
        coupling: &CouplingOperator,
        dt: f64,
        psi0: &TwoComponentWaveFunction,
    ) -> Result<f64> {
        if h.grid.n_points > 16 {
            return Err(Error::Capacity(
                "bracket evaluation is restricted to grids of at most 16 points".into(),
            ));
        }
        let step_fwd = StepOperator::new(h, dt);
        let step_bwd = StepOperator::new(h, -dt);
        let mu_e: Vec<f64> = (1..=self.n)
            .map(|q| -coupling.coupling_at(q as f64 * dt))
            .collect();
        let mut total = 0.0;
        for (key, net) in &self.groups {
            let mut scalar = 1.0;
            for (q, p) in key.slot_powers.iter().enumerate() {
                scalar *= mu_e[q].powi(*p as i32);
            }
            let mut ket = psi0.clone();
            for tok in key.word.iter().rev() {
                match tok {
                    Token::Swap => ket = apply_swap_coupling(1.0, &ket),
                    Token::Prop(z) => {
                        let (op, reps) = if *z > 0 {
                            (&step_fwd, *z as usize)
                        } else {
                            (&step_bwd, (-*z) as usize)
                        };
                        for _ in 0..reps {
                            op.apply(&mut ket);
                        }
                    }
                }
            }
            let bracket = inner_product(psi0, &ket)?;
            total += *net as f64 * scalar * bracket.re;
        }
        Ok(dt.powi(2 * self.m as i32) * total)
    }
}

/// Annihilation check: true when every surviving bracket group of the
/// oscillatory order `(n, m, k)` carries the common sign `(-1)^(k-m)`.
pub fn annihilation_check(n: usize, m: u32, k: u32) -> Result<bool> {
    Ok(survivor_groups(n, m, k)?.all_share_expected_sign())
}

/// `Σ_{j=p}^{q} (-1)^j` equals `(-1)^p` (and `(-1)^q`) when `q - p` is even
/// and zero otherwise.
pub fn alternating_sum_identity(p: u32, q: u32) -> bool {
    assert!(p <= q);
    let direct: i64 = (p..=q).map(|j| if j % 2 == 0 { 1 } else { -1 }).sum();
    let parity_even = (q - p) % 2 == 0;
    let sign_of = |x: u32| if x % 2 == 0 { 1i64 } else { -1 };
    let from_p = if parity_even { sign_of(p) } else { 0 };
    let from_q = if parity_even { sign_of(q) } else { 0 };
    direct == from_p && direct == from_q
}

/// Index-set equality behind the pyramid (and truncated frustum) sum
/// reordering: the nested sums on both sides run over exactly the same
/// 3-tuples `(j, d, s)`. For `k >= 2m` the frustum degenerates to the full
/// pyramid.
pub fn pyramid_reorder_check(two_m: u32, k: u32) -> Result<bool> {
    if two_m % 2 != 0 {
        return Err(Error::Usage(format!("two_m = {two_m} must be even")));
    }
    if two_m > 12 {
        return Err(Error::Capacity(format!(
            "pyramid check limited to two_m <= 12 (got {two_m})"
        )));
    }
    let tm = two_m as i64;
    let k = k as i64;
    let j_lo = (tm - k).max(0);
    let j_hi = k.min(tm);

    let mut lhs: BTreeSet<(i64, i64, i64)> = BTreeSet::new();
    for j in j_lo..=j_hi {
        for d in 0..=j {
            for s in (j - d)..=(tm - d) {
                lhs.insert((j, d, s));
            }
        }
    }

    let mut rhs: BTreeSet<(i64, i64, i64)> = BTreeSet::new();
    for s in 0..=tm {
        let d_lo = (tm - k - s).max(0);
        let d_hi = (tm - s).min(k);
        if d_lo > d_hi {
            continue;
        }
        for d in d_lo..=d_hi {
            let jj_lo = (tm - k).max(d).max(0);
            let jj_hi = (d + s).min(k);
            if jj_lo > jj_hi {
                continue;
            }
            for j in jj_lo..=jj_hi {
                rhs.insert((j, d, s));
            }
        }
    }
    Ok(lhs == rhs)
}
