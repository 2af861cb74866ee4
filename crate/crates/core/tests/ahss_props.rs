use proptest::prelude::*;
use twmk_core::ahss::{AhssPage, TwistClass};
use twmk_core::steenrod::{Poly, SteenrodRing};
use twmk_core::Height;

/// `RP^a × S^b × S^c`; factors with parameter below their minimum are left out.
fn ring(a: u32, b: u32, c: u32) -> SteenrodRing {
    let mut factors = Vec::new();
    if a > 0 {
        factors.push(SteenrodRing::rp(a));
    }
    if b >= 2 {
        factors.push(SteenrodRing::sphere(b));
    }
    if c >= 2 && c != b {
        factors.push(SteenrodRing::sphere(c));
    }
    let mut it = factors.into_iter();
    let first = it.next().unwrap_or_else(|| SteenrodRing::sphere(2));
    it.fold(first, |r, f| r.product(&f).unwrap())
}

fn subset(ring: &SteenrodRing, degree: u32, mask: u32) -> Poly {
    let mut p = Poly::zero();
    for (i, m) in ring.basis(degree).into_iter().enumerate() {
        if mask >> i & 1 == 1 {
            p.toggle(m);
        }
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn differential_preserves_euler_characteristic(
        a in 0u32..=8, b in 0u32..=7, c in 0u32..=9, n in 1u32..=2, mask: u32,
    ) {
        let r = ring(a, b, c);
        let h = Height::at_two(n).unwrap();
        let class = subset(&r, n + 2, mask);
        prop_assume!(r.sq(1, &class).unwrap().is_zero());
        let t = TwistClass::new(&r, h, class).unwrap();
        let e2 = AhssPage::e2(&r, h).unwrap();
        let turn = e2.first_differential(&t).unwrap();
        prop_assert_eq!(turn.next.euler_characteristic(), e2.euler_characteristic());
        prop_assert_eq!(turn.next.total() % 2, e2.total() % 2);
        prop_assert!(turn.next.total() <= e2.total());
        prop_assert_eq!(turn.r, AhssPage::first_length(h));
    }

    #[test]
    fn differential_has_length_r_and_squares_to_zero(
        a in 0u32..=8, b in 0u32..=7, c in 0u32..=9, n in 1u32..=2, mask: u32,
    ) {
        let r = ring(a, b, c);
        let h = Height::at_two(n).unwrap();
        let class = subset(&r, n + 2, mask);
        prop_assume!(r.sq(1, &class).unwrap().is_zero());
        let t = TwistClass::new(&r, h, class).unwrap();
        let e2 = AhssPage::e2(&r, h).unwrap();
        let len = AhssPage::first_length(h);
        let top = r.top_degree().unwrap();
        for s in 0..=top {
            for m in r.basis(s) {
                let x = Poly::monomial(m);
                let dx = e2.differential(&t, &x).unwrap();
                if !dx.is_zero() {
                    prop_assert_eq!(r.degree_of(&dx).unwrap(), Some(s + len));
                }
                prop_assert!(e2.differential(&t, &dx).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn zero_twist_matches_untwisted(a in 0u32..=8, b in 0u32..=7, c in 0u32..=9, n in 1u32..=3) {
        let r = ring(a, b, c);
        let h = Height::at_two(n).unwrap();
        let e2 = AhssPage::e2(&r, h).unwrap();
        let zero = e2.first_differential(&TwistClass::zero()).unwrap();
        let even = TwistClass::from_multiple(&r, h, 2, subset(&r, n + 2, u32::MAX)).unwrap();
        prop_assert_eq!(e2.first_differential(&even).unwrap().next, zero.next);
    }
}

#[test]
fn integral_classes_on_spheres() {
    for n in 1..=3 {
        let h = Height::at_two(n).unwrap();
        let s = SteenrodRing::sphere(n + 2);
        let e2 = AhssPage::e2(&s, h).unwrap();
        let t = TwistClass::new(&s, h, s.generator(&format!("sigma{}", n + 2)).unwrap()).unwrap();
        let turn = e2.first_differential(&t).unwrap();
        if n == 1 {
            assert_eq!(turn.next.total(), 0);
        } else {
            assert_eq!(turn.next.total(), 2);
        }
    }
}
