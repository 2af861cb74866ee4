//! End-to-end acceptance checks. Runs without the libtest harness so each
//! criterion prints exactly one line; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use twmk_core::abgrp::{k1_sandwich_periodic, s3_twisted_k};
use twmk_core::ahss::{AhssPage, TwistClass};
use twmk_core::algebra::{AlgebraPresentation, Element};
use twmk_core::catalog::{em_algebra, integral_twist_algebra, twist_character, EmGroup};
use twmk_core::linalg::Matrix;
use twmk_core::module::{Character, Freeness};
use twmk_core::steenrod::{Poly, SteenrodRing};
use twmk_core::{enumerate_characters, freeness_certificate, tensor_character, GradedDims, Height, ModuleOverAlgebra};

type Check = Result<(), String>;
type Criterion = (&'static str, Box<dyn FnOnce(&mut StdRng) -> Check>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn h(p: u32, n: u32) -> Height {
    Height::new(p, n).unwrap()
}

fn within(limit: Duration, start: Instant) -> Check {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

// ---- random modules ---------------------------------------------------------

fn inverse(m: &Matrix) -> Matrix {
    let n = m.rows();
    let (r, _) = m.hstack(&Matrix::identity(m.field(), n)).rref();
    r.select(&(0..n).collect::<Vec<_>>(), &(n..2 * n).collect::<Vec<_>>())
}

/// Conjugates every action by a random invertible matrix that preserves degrees.
fn scramble(m: &ModuleOverAlgebra, rng: &mut StdRng) -> ModuleOverAlgebra {
    let f = m.algebra().field();
    let n = m.dim();
    let p = loop {
        let mut p = Matrix::zeros(f, n, n);
        for i in 0..n {
            for j in 0..n {
                if m.degree(i) == m.degree(j) {
                    p.set(i, j, rng.gen_range(0..f.p()));
                }
            }
        }
        if p.rank() == n {
            break p;
        }
    };
    let q = inverse(&p);
    let actions = m.actions().iter().map(|x| q.mul(x).mul(&p)).collect();
    ModuleOverAlgebra::new(m.algebra().clone(), m.basis().to_vec(), actions).unwrap()
}

fn random_element(a: &AlgebraPresentation, rng: &mut StdRng) -> Element {
    let degrees: Vec<u32> = (0..a.height().modulus()).filter(|&d| !a.basis(d).is_empty()).collect();
    let d = degrees[rng.gen_range(0..degrees.len())];
    let p = a.field().p();
    a.normalize(a.basis(d).into_iter().map(|m| (m, rng.gen_range(0..p))))
}

fn random_classes(height: Height, rng: &mut StdRng, max: usize) -> GradedDims {
    let mut c = GradedDims::zero(height);
    for _ in 0..rng.gen_range(1..=max) {
        c.add(rng.gen_range(0..height.modulus()), 1);
    }
    c
}

// ---- criteria ---------------------------------------------------------------

fn em_vanishing() -> Check {
    let start = Instant::now();
    for n in 1..=3u32 {
        for k in 1..=8i64 {
            for j in 1..=4u32 {
                let args = [
                    "twmk".to_string(),
                    "--format".into(),
                    "records".into(),
                    "twisted-em".into(),
                    "--height".into(),
                    n.to_string(),
                    "--multiplier".into(),
                    k.to_string(),
                    "--truncation".into(),
                    j.to_string(),
                ];
                let out = twmk::run(args, None, None);
                ensure(out.code == 0, || format!("n={n} k={k} J={j}: {}", out.stderr))?;
                let rows: Vec<&str> = out.stdout.lines().filter(|l| l.starts_with("record=row table=dims")).collect();
                let modulus = 2 * ((1usize << n) - 1);
                ensure(rows.len() == modulus, || format!("n={n} k={k} J={j}: {} rows", rows.len()))?;
                ensure(rows.iter().all(|r| r.ends_with(" dim=0")), || format!("n={n} k={k} J={j}: nonzero table"))?;
                ensure(out.stdout.contains(" total=0"), || format!("n={n} k={k} J={j}: nonzero total"))?;
            }
        }
    }
    within(Duration::from_secs(1), start)
}

fn sphere_collapse() -> Check {
    let start = Instant::now();
    for n in 2..=3u32 {
        let height = h(2, n);
        let s = SteenrodRing::sphere(n + 2);
        let sigma = s.generator(&format!("sigma{}", n + 2)).unwrap();
        let t = TwistClass::new(&s, height, sigma).unwrap();
        let turn = AhssPage::e2(&s, height).unwrap().first_differential(&t).unwrap();
        ensure(turn.next.converged(), || format!("n={n}: not converged"))?;
        let entries: Vec<_> = turn.next.entries().collect();
        ensure(entries == vec![(0, 1), (n + 2, 1)], || format!("n={n}: page {entries:?}"))?;
        let expect = GradedDims::from_pairs(height, [(0, 1), ((n + 2) as i64, 1)]);
        ensure(turn.next.collapsed() == expect, || format!("n={n}: collapsed {}", turn.next.collapsed()))?;
    }
    within(Duration::from_secs(1), start)
}

fn three_sphere() -> Check {
    let height = h(2, 1);
    let s = SteenrodRing::sphere(3);
    let sigma = s.generator("sigma3").unwrap();
    let e2 = AhssPage::e2(&s, height).unwrap();
    for k in 1..=8i64 {
        let t = TwistClass::from_multiple(&s, height, k, sigma.clone()).unwrap();
        let next = e2.first_differential(&t).unwrap().next;
        let (g0, g1) = s3_twisted_k(k as u64);
        let (se, so) = k1_sandwich_periodic(&g0, &g1);
        let bounds = se.add(&so);
        if k % 2 == 1 {
            ensure(next.total() == 0, || format!("k={k}: E_4 total {}", next.total()))?;
            ensure(bounds.exact() == Some(0), || format!("k={k}: bounds {bounds}"))?;
        } else {
            ensure(next.total() == 2, || format!("k={k}: E_4 total {}", next.total()))?;
            ensure(bounds.contains(2), || format!("k={k}: 2 outside {bounds}"))?;
        }
    }
    Ok(())
}

fn untwisting(rng: &mut StdRng) -> Check {
    let start = Instant::now();
    for case in 0..50 {
        let n = rng.gen_range(1..=3);
        let big_j = rng.gen_range(1..=3);
        let height = h(2, n);
        let a = integral_twist_algebra(height, big_j).unwrap();
        let c = random_classes(height, rng, 6);
        let m = scramble(&ModuleOverAlgebra::free(&a, &c), rng);
        let cert = match freeness_certificate(&m).unwrap() {
            Freeness::Free(cert) => cert,
            Freeness::NotFree(r) => return Err(format!("case {case}: refused: {}", r.reason)),
        };
        ensure(cert.classes == c, || format!("case {case}: classes {} vs {c}", cert.classes))?;
        for chi in [twist_character(height, big_j).unwrap(), Character::augmentation(&a)] {
            let got = tensor_character(&m, &chi).unwrap();
            ensure(got == c, || format!("case {case}: {} gives {got}, expected {c}", chi.describe()))?;
        }
    }
    within(Duration::from_secs(5), start)
}

fn character_clash(rng: &mut StdRng) -> Check {
    for case in 0..50 {
        let n = rng.gen_range(1..=3);
        let height = h(2, n);
        let count = rng.gen_range(1..=3);
        let (a, chi) = if case % 2 == 0 {
            let a = integral_twist_algebra(height, count).unwrap();
            let chi = twist_character(height, count).unwrap();
            (a, chi)
        } else {
            let a = em_algebra(height, EmGroup::Cyclic { j: count }, n, 1).unwrap();
            let chi = Character::from_named(&a, &[("a0", 1)]).unwrap();
            (a, chi)
        };
        let mut rels = vec![a.generator_element(0)];
        for _ in 0..rng.gen_range(0..=2) {
            rels.push(random_element(&a, rng));
        }
        let m = scramble(&ModuleOverAlgebra::cyclic_quotient(&a, &rels).unwrap(), rng);
        ensure(m.action(0).is_zero(), || format!("case {case}: leading generator acts nontrivially"))?;
        let got = tensor_character(&m, &chi).unwrap();
        ensure(got.total() == 0, || format!("case {case}: {got}"))?;
    }
    Ok(())
}

fn character_count() -> Check {
    for n in 1..=3 {
        for j in 1..=4u32 {
            let a = em_algebra(h(2, n), EmGroup::Cyclic { j }, n, 1).unwrap();
            let got = enumerate_characters(&a).len();
            ensure(got == 1 << j, || format!("n={n} j={j}: {got} characters"))?;
        }
    }
    Ok(())
}

fn random_poly(r: &SteenrodRing, rng: &mut StdRng, max_degree: u32) -> (u32, Poly) {
    loop {
        let d = rng.gen_range(1..=max_degree);
        let basis = r.basis(d);
        if basis.is_empty() {
            continue;
        }
        let mut p = Poly::zero();
        for m in basis {
            if rng.gen_bool(0.5) {
                p.toggle(m);
            }
        }
        if !p.is_zero() {
            return (d, p);
        }
    }
}

fn steenrod_suite(rng: &mut StdRng) -> Check {
    let start = Instant::now();
    let rings = [
        SteenrodRing::rp_infinity(),
        SteenrodRing::wu_bo(10),
        SteenrodRing::wu_bso(10),
        SteenrodRing::rp(12).product(&SteenrodRing::sphere(5)).unwrap(),
    ];
    for case in 0..1000 {
        let j = rng.gen_range(0..=3u32);
        let len = (1u32 << (j + 1)) - 1;
        let r = &rings[case % rings.len()];
        let (dx, x) = random_poly(r, rng, 5);
        let (_, y) = random_poly(r, rng, 4);
        let qx = r.milnor_q(j, &x).map_err(|e| e.to_string())?;
        // the left side goes through squares alone, never through the derivation rule
        let lhs = r.milnor_q_by_squares(j, &r.mul(&x, &y)).map_err(|e| e.to_string())?;
        let rhs = r.mul(&qx, &y).add(&r.mul(&x, &r.milnor_q(j, &y).map_err(|e| e.to_string())?));
        ensure(lhs == rhs, || format!("case {case}: derivation fails for Q_{j}"))?;
        let direct = r.milnor_q_by_squares(j, &x).map_err(|e| e.to_string())?;
        ensure(direct == qx, || format!("case {case}: Q_{j} disagrees with its square recursion"))?;
        let qqx = r.milnor_q(j, &qx).map_err(|e| e.to_string())?;
        ensure(qqx.is_zero(), || format!("case {case}: Q_{j}^2 != 0"))?;
        if !qx.is_zero() {
            let d = r.degree_of(&qx).map_err(|e| e.to_string())?;
            ensure(d == Some(dx + len), || format!("case {case}: |Q_{j} x| = {d:?}"))?;
        }
    }
    let rp = &rings[0];
    let t = rp.generator("t").unwrap();
    for j in 0..=3 {
        let got = rp.milnor_q(j, &t).unwrap();
        ensure(got == rp.pow(&t, 1 << (j + 1)), || format!("Q_{j}(t) = {}", rp.format(&got)))?;
    }
    within(Duration::from_secs(5), start)
}

/// Row reduces all relations `a·e_j − χ(a) e_j` at once and counts free coordinates per degree.
fn cokernel_oracle(m: &ModuleOverAlgebra, chi: &Character) -> GradedDims {
    let a = m.algebra();
    let f = a.field();
    let mut rows = Vec::new();
    for mono in a.all_monomials() {
        let act = m.monomial_action(&mono);
        let c = chi.eval(&Element::monomial(mono, 1));
        for j in 0..m.dim() {
            let mut v = act.column(j);
            v[j] = f.sub(v[j], c);
            rows.push(v);
        }
    }
    let (_, pivots) = Matrix::from_rows(f, &rows, m.dim()).rref();
    GradedDims::from_pairs(
        a.height(),
        (0..m.dim()).filter(|i| !pivots.contains(i)).map(|i| (m.degree(i) as i64, 1)),
    )
}

fn oracle_equivalence(rng: &mut StdRng) -> Check {
    let algebras = [
        integral_twist_algebra(h(2, 2), 2).unwrap(),
        integral_twist_algebra(h(2, 1), 3).unwrap(),
        em_algebra(h(2, 3), EmGroup::Cyclic { j: 2 }, 3, 1).unwrap(),
        em_algebra(h(3, 1), EmGroup::Cyclic { j: 2 }, 1, 1).unwrap(),
        em_algebra(h(3, 2), EmGroup::Integers, 3, 1).unwrap(),
    ];
    let mut done = 0;
    while done < 200 {
        let a = &algebras[done % algebras.len()];
        let mut m: Option<ModuleOverAlgebra> = None;
        for s in 0..rng.gen_range(1..=3) {
            let rels: Vec<Element> = (0..rng.gen_range(0..=2)).map(|_| random_element(a, rng)).collect();
            let q = ModuleOverAlgebra::cyclic_quotient(a, &rels).unwrap();
            if q.dim() == 0 {
                continue;
            }
            let q = q.shifted(rng.gen_range(0..a.height().modulus()), &format!("s{s}"));
            m = Some(match m {
                None => q,
                Some(prev) => prev.direct_sum(&q),
            });
        }
        let Some(m) = m.filter(|m| m.dim() <= 12) else { continue };
        let m = scramble(&m, rng);
        for chi in enumerate_characters(a) {
            let got = tensor_character(&m, &chi).unwrap();
            let want = cokernel_oracle(&m, &chi);
            ensure(got == want, || format!("instance {done}: {got} vs oracle {want} at {}", chi.describe()))?;
        }
        done += 1;
    }
    Ok(())
}

fn rw_totals() -> Check {
    for p in [2u32, 3] {
        for n in 1..=3 {
            let height = h(p, n);
            for j in 1..=4u32 {
                for q in n..=n + 3 {
                    let a = em_algebra(height, EmGroup::Cyclic { j }, q, 1).unwrap();
                    let want = if q == n { (p as usize).pow(j) } else { 1 };
                    ensure(a.dimension() == want && a.hilbert().total() == want, || {
                        format!("K(Z/{p}^{j}, {q}) at n={n}: {}", a.dimension())
                    })?;
                }
                for q in n..=n + 3 {
                    let a = em_algebra(height, EmGroup::Integers, q + 1, j).unwrap();
                    let want = if q == n { (p as usize).pow(j) } else { 1 };
                    ensure(a.dimension() == want && a.hilbert().total() == want, || {
                        format!("K(Z, {}) at n={n}, J={j}: {}", q + 1, a.dimension())
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let mut rng = StdRng::seed_from_u64(0x7e57_2024);
    let criteria: Vec<Criterion> = vec![
        ("em-space vanishing", Box::new(|_| em_vanishing())),
        ("sphere collapse", Box::new(|_| sphere_collapse())),
        ("three-sphere twists", Box::new(|_| three_sphere())),
        ("untwisting certificate", Box::new(untwisting)),
        ("character-clash vanishing", Box::new(character_clash)),
        ("character count", Box::new(|_| character_count())),
        ("milnor primitive properties", Box::new(steenrod_suite)),
        ("cokernel oracle equivalence", Box::new(oracle_equivalence)),
        ("ravenel-wilson totals", Box::new(|_| rw_totals())),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check(&mut rng);
        let ms = start.elapsed().as_millis();
        match result {
            Ok(()) => println!("PASS {} {name} ({ms} ms)", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {} {name} ({ms} ms): {e}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
