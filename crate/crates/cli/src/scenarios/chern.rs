//! Exact identities of the virtual-bundle construction, each checked against a
//! direct rational evaluation written independently of the library routines.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use prequant_core::chern::{build_l, fmt_rational, rat, solve_lk, todd, LkSystem, TruncPoly};

use crate::config::ChernScenario;
use crate::report::{ScenarioReport, Verdict};

fn factorial(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// `sum_j rows[k][j] j^m / m!` with `j` running over `1..=n+2`.
fn combination_coeff(row: &[BigInt], m: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for (idx, c) in row.iter().enumerate() {
        let j = BigInt::from(idx + 1);
        acc += BigRational::new(c * num_traits::pow(j, m), factorial(m));
    }
    acc
}

/// Mismatches of `ch(L_k) = N x^{n+1-k}` over all `k` and degrees.
fn lk_mismatches(lk: &LkSystem) -> usize {
    let n = lk.n;
    let big_n = BigRational::from_integer(lk.big_n.clone());
    let mut bad = 0;
    for k in 0..=n + 1 {
        for m in 0..=n + 1 {
            let want = if m == n + 1 - k { big_n.clone() } else { BigRational::zero() };
            if combination_coeff(lk.row_for(k), m) != want {
                bad += 1;
            }
        }
    }
    bad
}

/// `N` is minimal iff it equals the lcm of the inverse's denominators.
fn n_is_minimal(lk: &LkSystem) -> bool {
    let mut lcm = BigInt::one();
    for row in &lk.rows {
        for c in row {
            let inv = BigRational::new(c.clone(), lk.big_n.clone());
            lcm = lcm.lcm(inv.denom());
        }
    }
    lcm == lk.big_n
}

fn random_rational(rng: &mut impl Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-30i64..=30)), BigInt::from(rng.gen_range(1i64..=12)))
}

/// `(n+1)! N^{n+1} (x^{n+1}/(n+1) - sum_k alpha_k x^{n+1-k}/(n-k+1))` truncated at `n+1`.
fn closed_form(n: usize, big_n: &BigInt, alphas: &[Vec<BigRational>]) -> Vec<BigRational> {
    let cap = n + 1;
    let pre = BigRational::from_integer(factorial(n + 1) * num_traits::pow(big_n.clone(), n + 1));
    let mut out = vec![BigRational::zero(); cap + 1];
    out[cap] = BigRational::new(BigInt::one(), BigInt::from(n + 1));
    for (idx, a) in alphas.iter().enumerate() {
        let k = idx + 1;
        let w = BigRational::new(BigInt::one(), BigInt::from(n - k + 1));
        // alpha_k x^{n+1-k}: degree d of alpha_k lands in degree d + n + 1 - k.
        for (d, c) in a.iter().enumerate() {
            let deg = d + cap - k;
            if deg <= cap {
                out[deg] -= c * &w;
            }
        }
    }
    out.into_iter().map(|c| c * &pre).collect()
}

pub fn run(s: &ChernScenario, rng: &mut impl Rng) -> ScenarioReport {
    let mut rep = ScenarioReport::new("chern", &s.name);
    for &n in &s.dims {
        let lk = match solve_lk(n) {
            Ok(lk) => lk,
            Err(e) => {
                rep.verdict(Verdict::failed(format!("solve_lk_n{n}"), e.to_string()));
                continue;
            }
        };
        rep.fact(format!("N_n{n}"), &lk.big_n);
        let rows: Vec<String> = lk
            .rows
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")))
            .collect();
        rep.fact(format!("rows_n{n}"), rows.join(" "));
        rep.verdict(Verdict::exact(format!("lk_identity_n{n}"), lk_mismatches(&lk)));
        rep.verdict(Verdict::exact(format!("n_minimal_n{n}"), usize::from(!n_is_minimal(&lk))));
        if n == 1 {
            let expected = [
                [rat(3, 1), rat(-3, 1), rat(1, 1)],
                [rat(-5, 2), rat(4, 1), rat(-3, 2)],
                [rat(1, 1), rat(-2, 1), rat(1, 1)],
            ];
            let mut bad = usize::from(lk.big_n != BigInt::from(2));
            let mut shown = Vec::new();
            for (i, row) in expected.iter().enumerate() {
                let got = lk.inverse.row(i);
                shown.push(format!("[{}]", got.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")));
                bad += got.iter().zip(row).filter(|(a, b)| a != b).count();
            }
            rep.fact("inverse_n1", shown.join(" "));
            rep.verdict(Verdict::exact("inverse_rows_n1", bad));
        }

        let cap = n + 1;
        let mut bad = 0;
        for _ in 0..s.random_cases {
            // alpha_k has support in degrees k..=cap.
            let raw: Vec<Vec<BigRational>> = (1..=n)
                .map(|k| (0..=cap).map(|d| if d >= k { random_rational(rng) } else { BigRational::zero() }).collect())
                .collect();
            let classes: Vec<TruncPoly> = raw.iter().map(|c| TruncPoly::from_coeffs(cap, c.clone())).collect();
            let want = closed_form(n, &lk.big_n, &raw);
            match build_l(&lk, &classes) {
                Ok(got) => bad += (0..=cap).filter(|&m| got.coeff(m) != want[m]).count(),
                Err(_) => bad += 1,
            }
        }
        rep.verdict(Verdict::exact(format!("build_l_closed_form_n{n}"), bad));
        let zero: Vec<TruncPoly> = (0..n).map(|_| TruncPoly::zero(cap)).collect();
        if let Ok(l0) = build_l(&lk, &zero) {
            rep.fact(format!("build_l_flat_top_n{n}"), fmt_rational(&l0.coeff(cap)));
        }
    }
    let mut bad = 0;
    for d in 0..=2 {
        match todd(&TruncPoly::zero(d), &TruncPoly::zero(d), d) {
            Ok(t) => bad += usize::from(t != TruncPoly::one(d)),
            Err(_) => bad += 1,
        }
    }
    let x = TruncPoly::monomial(2, 1, BigRational::one());
    match todd(&x, &TruncPoly::zero(2), 2) {
        Ok(t) => {
            let want = TruncPoly::from_coeffs(2, [rat(1, 1), rat(1, 2), rat(1, 12)]);
            bad += usize::from(t != want);
        }
        Err(_) => bad += 1,
    }
    rep.verdict(Verdict::exact("todd_expansion", bad));
    rep
}
