//! End-to-end acceptance checks. Each test prints one `criterion N: pass|fail`
//! line before asserting.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ddr::complex::{chain_map_check, induced_map_rank, weight_truncate, MatrixComplex};
use ddr::derham::{
    a1_invariance_check, amitsur_vs_derham, cartier_check, cotangent_complex, derham_report, hodge_graded, wedge_power,
    DeRhamAlgebra, Verdict,
};
use ddr::dg::{free_presentation, koszul_over_quotient, koszul_presentation, tower_map_over_quotient, DGPresentation};
use ddr::groebner::{annihilator_chain, buchberger, MonomialOrder};
use ddr::linalg::{rank_ff, verify_certificate, SparseMatrix};
use ddr::parse::parse_poly;
use ddr::reiffen::{classical_stalk_cohomology, divergence_system, family_member, solve_system, FeasibilityVerdict, DEFAULT_UNKNOWN_CAP};
use ddr::witness::{binary64_lower_bound, nonexactness_witness, WitnessVerdict, MARGIN};
use ddr::{Monomial, Poly, Rational, VarContext};

fn report(n: u32, ok: bool, detail: &str) {
    println!("criterion {n}: {} ({detail})", if ok { "pass" } else { "fail" });
}

fn v1() -> VarContext {
    VarContext::new(["x"])
}

fn v2() -> VarContext {
    VarContext::new(["x", "y"])
}

fn poly(s: &str, v: &VarContext) -> Poly {
    parse_poly(s, v).unwrap()
}

fn k1(v: &VarContext, gens: &[&str]) -> DGPresentation {
    let s: Vec<Poly> = gens.iter().map(|g| poly(g, v)).collect();
    koszul_presentation(v, &s, 1).unwrap()
}

const REIFFEN: &str = "x^4 + y^5 + y^4*x";

/// Plain dense Gaussian elimination, kept separate from the library solver.
fn dense_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank][c].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let factor = &rows[r][c] / &pivot;
                for k in c..ncols {
                    let delta = &rows[rank][k] * &factor;
                    rows[r][k] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn dense_system(f: &Poly, degree: u32) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let s = divergence_system(f, &Poly::one(f.vars()), degree).unwrap();
    let mut a = vec![vec![Rational::zero(); s.unknowns.len()]; s.rows.len()];
    for (r, row) in s.rows.iter().enumerate() {
        for (j, c) in &row.coefficients {
            a[r][*j] = c.clone();
        }
    }
    let ab = a.iter().zip(&s.rows).map(|(row, r)| row.iter().cloned().chain([r.rhs.clone()]).collect()).collect();
    (a, ab)
}

#[test]
fn criterion_01_reiffen_infeasibility() {
    let start = Instant::now();
    let f = poly(REIFFEN, &v2());
    let s8 = divergence_system(&f, &Poly::one(&v2()), 8).unwrap();
    let (a, b) = s8.matrix();
    let verdict = solve_system(&s8, DEFAULT_UNKNOWN_CAP);
    let certified = match &verdict {
        FeasibilityVerdict::Infeasible { certificate } => verify_certificate(&a, &b, certificate),
        _ => false,
    };
    let s5 = divergence_system(&f, &Poly::one(&v2()), 5).unwrap();
    let (_, view) = s5.forced_zero_view();
    let has = |rows: &[ddr::reiffen::Row], exp: &[(&str, i64)], rhs: i64| rows.iter().any(|r| r.matches(&s5.labels, exp, rhs));
    let rows_ok = has(&view, &[("A10", 5), ("B01", 1)], 1)
        && has(&view, &[("A10", 1), ("B01", 6)], 1)
        && has(&view, &[("A10", 2), ("B01", 5)], 1)
        && has(&s5.rows, &[("A00", 4)], 0);
    let elapsed = start.elapsed();
    let ok = certified && rows_ok && elapsed < Duration::from_secs(5);
    report(1, ok, &format!("certificate verified={certified}, D=5 rows present={rows_ok}, {elapsed:.2?}"));
    assert!(ok);
}

#[test]
fn criterion_02_family_scan() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for (q, p) in [(4, 5), (4, 6), (5, 6), (5, 7)] {
        let f = family_member(q, p);
        let d = p + 4;
        let infeasible = solve_system(&divergence_system(&f, &Poly::one(f.vars()), d).unwrap(), DEFAULT_UNKNOWN_CAP).is_infeasible();
        let (a, ab) = dense_system(&f, d);
        let (ra, rab) = (dense_rank(a), dense_rank(ab));
        ok &= infeasible && ra < rab;
        details.push(format!("({q},{p}) D={d} rank {ra}/{rab}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    report(2, ok, &format!("{}, {elapsed:.2?}", details.join("; ")));
    assert!(ok);
}

#[test]
fn criterion_03_classical_stalk_failure() {
    let r = classical_stalk_cohomology(&[poly(REIFFEN, &v2())], 9).unwrap();
    let smooth = classical_stalk_cohomology(&[poly("x", &v2())], 9).unwrap();
    let ok = r.dim(1) >= 1 && r.is_stable(1) && smooth.dim(1) == 0 && smooth.is_stable(1);
    report(3, ok, &format!("reiffen H^1={} stable={}, line H^1={} stable={}", r.dim(1), r.is_stable(1), smooth.dim(1), smooth.is_stable(1)));
    assert!(ok);
}

#[test]
fn criterion_04_cartier() {
    let cases = [
        (v1(), vec!["x^2"]),
        (v2(), vec!["x", "y"]),
        (v2(), vec!["x*y"]),
        (v2(), vec!["x^2 + y^3"]),
    ];
    let mut failures = Vec::new();
    for (v, gens) in &cases {
        let p = k1(v, gens);
        for k in 0..=3 {
            let r = cartier_check(&p, k, 6).unwrap();
            if r.verdict != Verdict::Equal {
                failures.push(format!("{gens:?} k={k}: {}", r.verdict));
            }
        }
    }
    let ok = failures.is_empty();
    report(4, ok, &if ok { "16 comparisons equal".to_string() } else { failures.join("; ") });
    assert!(ok);
}

#[test]
fn criterion_05_regular_sequence() {
    let p = k1(&v2(), &["x", "y"]);
    let mut ok = true;
    for w in 0..=8 {
        let h = weight_truncate(&p, w).unwrap().cohomology();
        ok &= h.get(&-1).copied().unwrap_or(0) == 0 && h.get(&-2).copied().unwrap_or(0) == 0;
        ok &= h.get(&0).copied().unwrap_or(0) == 1;
    }
    report(5, ok, "H^-1 = H^-2 = 0 and H^0 = 1 for W = 0..=8");
    assert!(ok);
}

#[test]
fn criterion_06_pro_zero_tower() {
    let v = v2();
    let xy = poly("x*y", &v);
    let x = poly("x", &v);
    let chain = annihilator_chain(std::slice::from_ref(&xy), &x, 4, &v).unwrap();
    let y_ideal = buchberger(&[poly("y", &v)], &v, &MonomialOrder::grevlex(2)).unwrap();
    let chain_ok = chain.chain.iter().all(|c| *c == y_ideal) && chain.stabilization == Some(1);
    let phi = tower_map_over_quotient(&v, std::slice::from_ref(&xy), std::slice::from_ref(&x), 2, 1).unwrap();
    let is_chain_map = chain_map_check(&phi, 6).unwrap();
    let induced = induced_map_rank(&phi, 6, -1).unwrap();
    let k2 = koszul_over_quotient(&v, std::slice::from_ref(&xy), std::slice::from_ref(&x), 2).unwrap();
    let source_h = weight_truncate(&k2, 6).unwrap().cohomology().get(&-1).copied().unwrap_or(0);
    let ok = chain_ok && is_chain_map && induced == 0 && source_h > 0;
    report(6, ok, &format!("chain (y) stab=1: {chain_ok}, chain map: {is_chain_map}, dim H^-1(K2)={source_h}, induced rank={induced}"));
    assert!(ok);
}

#[test]
fn criterion_07_amitsur() {
    let start = Instant::now();
    let r = amitsur_vs_derham(&poly("x^2", &v1()), 3, 3, 6).unwrap();
    let elapsed = start.elapsed();
    let dims = |m: &BTreeMap<i32, usize>| (m.get(&0).copied().unwrap_or(0), m.get(&1).copied().unwrap_or(0));
    let ok = r.agree && dims(&r.totalization) == (1, 0) && dims(&r.derham) == (1, 0) && elapsed < Duration::from_secs(30);
    report(7, ok, &format!("amitsur {:?}, derham {:?}, {elapsed:.2?}", dims(&r.totalization), dims(&r.derham)));
    assert!(ok);
}

#[test]
fn criterion_08_a1_invariance() {
    let cases = [("line", free_presentation(&v1())), ("fat point", k1(&v1(), &["x^2"])), ("reiffen", k1(&v2(), &[REIFFEN]))];
    let mut ok = true;
    let mut details = Vec::new();
    for (name, p) in &cases {
        let passed = a1_invariance_check(p, 3, 6).unwrap().passed;
        ok &= passed;
        details.push(format!("{name}={passed}"));
    }
    report(8, ok, &details.join(", "));
    assert!(ok);
}

#[test]
fn criterion_09_derived_poincare_lemma() {
    let mut ok = true;
    for gens in [["x"], ["x^2"]] {
        let r = derham_report(&k1(&v1(), &gens), 3, 6).unwrap();
        ok &= r.dim(0) == 1 && r.is_stable(0);
        ok &= r.dims.iter().all(|(n, d)| *n == 0 || !r.is_stable(*n) || *d == 0);
    }
    report(9, ok, "H^0 = 1, other stable dims 0 for (x) and (x^2) at K=3, W=6");
    assert!(ok);
}

#[test]
fn criterion_10_witness() {
    let r = nonexactness_witness(3, 200, ddr::witness::DEFAULT_GRID).unwrap();
    let logs: Vec<f64> = r.entries.iter().map(|e| e.lower.log_f64()).collect();
    let positive = r.entries.iter().all(|e| e.verdict == WitnessVerdict::Positive && e.lower.margin() >= MARGIN);
    let finite = logs.iter().all(|l| l.is_finite());
    let ordered = logs.windows(2).all(|w| w[0] >= w[1]);
    let below_upper = r.entries.iter().all(|e| e.lower.log_f64() <= e.upper_log);
    let (a, b) = r.entries[2].interval;
    let underflow = binary64_lower_bound(a, b, ddr::witness::DEFAULT_GRID) == 0.0;
    let ok = positive && finite && ordered && below_upper && underflow;
    report(10, ok, &format!("log T lower bounds {logs:?}, binary64 n=3 underflows={underflow}"));
    assert!(ok);
}

fn random_rational(rng: &mut StdRng) -> Rational {
    Rational::new(rng.gen_range(-5..=5).into(), rng.gen_range(1..=3).into())
}

fn random_poly(rng: &mut StdRng, v: &VarContext, max_deg: u32, terms: usize) -> Poly {
    let monos = Monomial::all_up_to(v.len(), max_deg);
    Poly::from_terms(v, (0..terms).map(|_| (monos[rng.gen_range(0..monos.len())].clone(), random_rational(rng))))
}

fn complexes_built_by_the_engine() -> Vec<MatrixComplex> {
    let presentations = [k1(&v1(), &["x^2"]), k1(&v2(), &["x", "y"]), k1(&v2(), &["x*y"]), k1(&v2(), &[REIFFEN])];
    let mut out = Vec::new();
    for p in &presentations {
        out.push(weight_truncate(p, 6).unwrap());
        let dr = DeRhamAlgebra::new(p).unwrap();
        out.push(dr.stage_complex(3, 6).unwrap().complex);
        let l = cotangent_complex(p).unwrap();
        for k in 0..=3 {
            out.push(hodge_graded(p, k as u32, 6).unwrap());
            out.push(wedge_power(&l, k, 6).unwrap());
        }
    }
    out
}

#[test]
fn criterion_11_engine_invariants() {
    let mut rng = StdRng::seed_from_u64(11);

    let complexes = complexes_built_by_the_engine();
    let d_squared = complexes.iter().all(|c| c.check_d_squared().is_ok());

    let p = k1(&v2(), &[REIFFEN]);
    let dr = DeRhamAlgebra::new(&p).unwrap();
    let alg = dr.algebra();
    let basis = dr.basis(6, 0..=2);
    let mut leibniz = true;
    for _ in 0..100 {
        let (ma, mb) = (&basis[rng.gen_range(0..basis.len())], &basis[rng.gen_range(0..basis.len())]);
        let (a, b) = (alg.monomial_element(ma.clone()), alg.monomial_element(mb.clone()));
        let sign = if alg.is_odd(ma) { -Rational::one() } else { Rational::one() };
        for d in [DeRhamAlgebra::total as fn(&DeRhamAlgebra, &_) -> _, DeRhamAlgebra::internal, DeRhamAlgebra::derham] {
            let lhs = d(&dr, &alg.mul(&a, &b));
            let mut rhs = alg.mul(&d(&dr, &a), &b);
            rhs.add_scaled(&alg.mul(&a, &d(&dr, &b)), &sign);
            leibniz &= lhs == rhs;
        }
    }

    let mut ranks = true;
    for _ in 0..100 {
        let (m, n) = (rng.gen_range(1..7), rng.gen_range(1..7));
        let rank_cap = rng.gen_range(1..=m.min(n));
        // low-rank products make rank deficiency common
        let left: Vec<Vec<i64>> = (0..m).map(|_| (0..rank_cap).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let right: Vec<Vec<i64>> = (0..rank_cap).map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let dense: Vec<Vec<Rational>> = (0..m)
            .map(|i| (0..n).map(|j| Rational::from_integer((0..rank_cap).map(|k| left[i][k] * right[k][j]).sum::<i64>().into())).collect())
            .collect();
        ranks &= rank_ff(&SparseMatrix::from_dense(&dense)) == dense_rank(dense);
    }

    let v = v2();
    let mut membership = true;
    for _ in 0..20 {
        let gens: Vec<Poly> = (0..rng.gen_range(1..=2)).map(|_| random_poly(&mut rng, &v, 2, 3)).filter(|g| !g.is_zero()).collect();
        if gens.is_empty() {
            continue;
        }
        let grevlex = buchberger(&gens, &v, &MonomialOrder::grevlex(2)).unwrap();
        let lex = buchberger(&gens, &v, &MonomialOrder::lex(2)).unwrap();
        for _ in 0..5 {
            let mut member = Poly::zero(&v);
            for g in &gens {
                member = &member + &(g * &random_poly(&mut rng, &v, 2, 2));
            }
            let other = &member + &random_poly(&mut rng, &v, 3, 2);
            for q in [member, other] {
                membership &= grevlex.contains(&q) == lex.contains(&q);
            }
        }
    }

    let ok = d_squared && leibniz && ranks && membership;
    report(
        11,
        ok,
        &format!("d^2=0 on {} complexes: {d_squared}, leibniz: {leibniz}, rank oracle: {ranks}, membership: {membership}", complexes.len()),
    );
    assert!(ok);
}

#[test]
fn sanity_dense_rank_oracle() {
    let m: Vec<Vec<Rational>> = [[1, 2], [2, 4]].iter().map(|r| r.iter().map(|x| Rational::from_integer((*x).into())).collect()).collect();
    assert_eq!(dense_rank(m), 1);
}
