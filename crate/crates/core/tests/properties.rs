//! Property-based and invariant tests across the modules: exact arithmetic
//! round-trips, refinement consistency, measure decompositions, quantizer
//! invariants.

mod common;

use bdforge::fields::{
    blend, common_refine, overlay_rects, serial, AffineMap, Caps, CutoffField, CutoffPiece,
    PACell, PAField, PPField, Pw1D, Rect,
};
use bdforge::counterexamples::caccioppoli::{random_caccioppoli, PieceMode};
use bdforge::laminate::{laminate_replace, pencil, sawtooth};
use bdforge::measures::{jump_set, lq_gradient, strain_report, strain_report_pp};
use bdforge::numeric::{gauss_quad_2d, seg_norm_integral, Mat2, QuadRect, Rat, Vec2};
use bdforge::quantize::cantor_quantize;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-1000i64..1000, 1i64..60).prop_map(|(n, d)| Rat::new(n, d))
}

fn arb_mat() -> impl Strategy<Value = Mat2> {
    (arb_rat(), arb_rat(), arb_rat(), arb_rat()).prop_map(|(a, b, c, d)| Mat2::new(a, b, c, d))
}

proptest! {
    #[test]
    fn rat_addition_round_trips(a in arb_rat(), b in arb_rat()) {
        prop_assert_eq!(&(&a + &b) - &b, a);
    }

    #[test]
    fn rat_mul_div_round_trips(a in arb_rat(), b in arb_rat()) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!(&(&a * &b) / &b, a);
    }

    #[test]
    fn sym_skew_decomposition(m in arb_mat()) {
        let back = &m.sym() + &m.skew();
        prop_assert_eq!(back, m.clone());
        prop_assert!(m.skew().is_skew());
        prop_assert!(m.skew().sym().is_zero());
    }

    #[test]
    fn seg_norm_integral_additive(
        px in -5.0f64..5.0, py in -5.0f64..5.0,
        qx in -5.0f64..5.0, qy in -5.0f64..5.0,
        l in 0.1f64..4.0, frac in 0.05f64..0.95,
    ) {
        let total = seg_norm_integral((px, py), (qx, qy), l).unwrap();
        let split = l * frac;
        let left = seg_norm_integral((px, py), (qx, qy), split).unwrap();
        // second piece starts at p + split q
        let p2 = (px + split * qx, py + split * qy);
        let right = seg_norm_integral(p2, (qx, qy), l - split).unwrap();
        prop_assert!(
            (total.value - (left.value + right.value)).abs() <= 2e-12 * (1.0 + total.value.abs()),
            "{} vs {}", total.value, left.value + right.value
        );
    }

    #[test]
    fn gauss_quad_exact_on_polynomials(
        c00 in -3.0f64..3.0, c10 in -3.0f64..3.0, c01 in -3.0f64..3.0,
        c11 in -3.0f64..3.0, c22 in -3.0f64..3.0,
    ) {
        // bi-degree <= 2 << order - 1
        let f = move |x: f64, y: f64| c00 + c10 * x + c01 * y + c11 * x * y + c22 * x * x * y * y;
        let r = gauss_quad_2d(&f, QuadRect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }, 8).unwrap();
        let exact = c00 + c10 / 2.0 + c01 / 2.0 + c11 / 4.0 + c22 / 9.0;
        prop_assert!((r.value - exact).abs() <= 1e-14 * (1.0 + exact.abs()));
    }

    #[test]
    fn jump_eu_dominated_by_jump_du(seed in 0u64..400) {
        let caps = Caps::default();
        let mode = if seed % 2 == 0 { PieceMode::Rigid } else { PieceMode::Affine };
        let f = random_caccioppoli(seed, 12, mode, 3, &caps).unwrap();
        let rep = strain_report(&f).unwrap();
        prop_assert!(rep.jump_eu.value <= rep.jump_du.value + rep.jump_du.abs_error_bound
            + rep.jump_eu.abs_error_bound);
        // decomposition consistency
        let sum = rep.bulk_grad_l1.value + rep.jump_du.value;
        prop_assert!((rep.du_total.value - sum).abs() <= rep.du_total.abs_error_bound + 1e-12);
        prop_assert!(rep.eu_total.value <= rep.du_total.value
            + rep.du_total.abs_error_bound + rep.eu_total.abs_error_bound);
    }
}

#[test]
fn refine_preserves_evaluation_at_random_points() {
    let caps = Caps::default();
    let f = random_caccioppoli(11, 23, PieceMode::Affine, 3, &caps).unwrap();
    let g = random_caccioppoli(12, 17, PieceMode::Affine, 3, &caps).unwrap();
    let (rf, rg) = common_refine(&f, &g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let x = Rat::new(rng.gen_range(1..999), 1000);
        let y = Rat::new(rng.gen_range(1..996), 997);
        let p = Vec2::new(x, y);
        assert_eq!(f.evaluate(&p).unwrap(), rf.evaluate(&p).unwrap());
        assert_eq!(g.evaluate(&p).unwrap(), rg.evaluate(&p).unwrap());
    }
}

#[test]
fn refine_grid_matches_brute_force_product() {
    // m x 1 vs 1 x n grid splits give m*n cells
    let caps = Caps::default();
    let m = 7usize;
    let n = 5usize;
    let dom = Rect::unit();
    let mut cells_a = Vec::new();
    for i in 0..m {
        cells_a.push(PACell {
            rect: Rect::new(
                Rat::new(i as i64, m as i64),
                Rat::new(i as i64 + 1, m as i64),
                Rat::zero(),
                Rat::one(),
            ),
            map: AffineMap::constant(Vec2::ints(i as i64, 0)),
        });
    }
    let mut cells_b = Vec::new();
    for j in 0..n {
        cells_b.push(PACell {
            rect: Rect::new(
                Rat::zero(),
                Rat::one(),
                Rat::new(j as i64, n as i64),
                Rat::new(j as i64 + 1, n as i64),
            ),
            map: AffineMap::constant(Vec2::ints(0, j as i64)),
        });
    }
    let fa = PAField::new(dom.clone(), cells_a, &caps).unwrap();
    let fb = PAField::new(dom, cells_b, &caps).unwrap();
    let (ra, rb) = common_refine(&fa, &fb).unwrap();
    assert_eq!(ra.cells.len(), m * n);
    assert_eq!(rb.cells.len(), m * n);
    // sweep overlay agrees with the brute-force double loop
    let ar: Vec<Rect> = fa.cells.iter().map(|c| c.rect.clone()).collect();
    let br: Vec<Rect> = fb.cells.iter().map(|c| c.rect.clone()).collect();
    let mut sweep = overlay_rects(&ar, &br);
    let mut brute = common::brute_force_overlay(&ar, &br);
    sweep.sort_by(|a, b| a.0.lex_key().cmp(&b.0.lex_key()));
    brute.sort_by(|a, b| a.0.lex_key().cmp(&b.0.lex_key()));
    assert_eq!(sweep.len(), brute.len());
    for (s, b) in sweep.iter().zip(brute.iter()) {
        assert_eq!(s.0, b.0);
        assert_eq!((s.1, s.2), (b.1, b.2));
    }
}

#[test]
fn strain_report_invariant_under_refinement() {
    let caps = Caps::default();
    let f = random_caccioppoli(5, 15, PieceMode::Affine, 3, &caps).unwrap();
    let grid = random_caccioppoli(6, 9, PieceMode::Rigid, 1, &caps).unwrap();
    let (rf, _) = common_refine(&f, &grid).unwrap();
    let a = strain_report(&f).unwrap();
    let b = strain_report(&rf).unwrap();
    assert_eq!(a.jump_length, b.jump_length, "exact jump length changed");
    let close = |x: bdforge::numeric::NormIntegral, y: bdforge::numeric::NormIntegral| {
        (x.value - y.value).abs() <= x.abs_error_bound + y.abs_error_bound + 1e-11
    };
    assert!(close(a.bulk_grad_l1, b.bulk_grad_l1));
    assert!(close(a.jump_du, b.jump_du));
    assert!(close(a.jump_eu, b.jump_eu));
    assert!(close(a.du_total, b.du_total));
    assert_eq!(a.skew_exact, b.skew_exact);
}

#[test]
fn zero_jump_split_adds_no_records() {
    let caps = Caps::default();
    let f = random_caccioppoli(21, 9, PieceMode::Affine, 2, &caps).unwrap();
    let before = strain_report(&f).unwrap();
    // split every cell along a vertical line without changing the map
    let mut cells = Vec::new();
    for c in &f.cells {
        let half = Rat::new(1, 2);
        let mid = &(&c.rect.x0 + &c.rect.x1) * &half;
        cells.push(PACell {
            rect: Rect::new(c.rect.x0.clone(), mid.clone(), c.rect.y0.clone(), c.rect.y1.clone()),
            map: c.map.clone(),
        });
        cells.push(PACell {
            rect: Rect::new(mid, c.rect.x1.clone(), c.rect.y0.clone(), c.rect.y1.clone()),
            map: c.map.clone(),
        });
    }
    let split = PAField::new(f.domain.clone(), cells, &caps).unwrap();
    // existing records may be subdivided, but nothing new appears: the
    // exact jump length is unchanged and no record sits on a split line
    let after = strain_report(&split).unwrap();
    assert_eq!(after.jump_length, before.jump_length);
    assert!((after.jump_du.value - before.jump_du.value).abs()
        <= after.jump_du.abs_error_bound + before.jump_du.abs_error_bound);
    let split_lines: Vec<Rat> = f
        .cells
        .iter()
        .map(|c| &(&c.rect.x0 + &c.rect.x1) * &Rat::new(1, 2))
        .collect();
    for rec in jump_set(&split) {
        if rec.nu == bdforge::measures::Axis::X {
            assert!(!split_lines.contains(&rec.start.x), "jump on a zero-jump split line");
        }
    }
}

#[test]
fn blend_with_itself_is_identity() {
    let caps = Caps::default();
    let f = PPField::from_pa(&random_caccioppoli(31, 6, PieceMode::Affine, 2, &caps).unwrap());
    // admissible separable cut-off on a sub-rectangle
    let stair = bdforge::quantize::cantor_stair(2).unwrap();
    let rect = Rect::new(Rat::new(1, 8), Rat::new(7, 8), Rat::new(1, 8), Rat::new(7, 8));
    let psi = CutoffField {
        pieces: vec![CutoffPiece {
            rect: rect.clone(),
            fx: stair.f.precompose_affine(&Rat::new(4, 3), &Rat::new(-1, 6)),
            fy: Pw1D::constant(rect.y0.clone(), rect.y1.clone(), Rat::one()),
        }],
    };
    let out = blend(&psi, &f, &f, &caps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let p = Vec2::new(Rat::new(rng.gen_range(1..499), 500), Rat::new(rng.gen_range(1..499), 500));
        assert_eq!(out.evaluate(&p).unwrap(), f.evaluate(&p).unwrap());
    }
}

#[test]
fn serialization_is_bit_exact_on_laminate_output() {
    // ten-thousand-cell strip field round-trips byte-exactly
    let caps = Caps::default();
    let pen = pencil(0);
    let field = PAField::uniform(Rect::unit(), AffineMap::linear(pen.c_k.clone()));
    let split = pen.second_split();
    let (v, _) = laminate_replace(&field, &split, 0.0000374, &caps).unwrap();
    assert!(v.cells.len() >= 10_000, "want a large field, got {}", v.cells.len());
    let s1 = serial::pa_to_json(&v);
    let back = serial::pa_from_json(&s1, &caps).unwrap();
    assert_eq!(v, back);
    assert_eq!(s1, serial::pa_to_json(&back));
}

#[test]
fn laminate_keeps_untouched_cells_and_budgets() {
    let caps = Caps::default();
    // two-cell field: only the right cell carries C_0
    let pen = pencil(0);
    let half = Rat::new(1, 2);
    let field = PAField::new(
        Rect::unit(),
        vec![
            PACell {
                rect: Rect::new(Rat::zero(), half.clone(), Rat::zero(), Rat::one()),
                map: AffineMap::zero(),
            },
            PACell {
                rect: Rect::new(half, Rat::one(), Rat::zero(), Rat::one()),
                map: AffineMap::linear(pen.c_k.clone()),
            },
        ],
        &caps,
    )
    .unwrap();
    let split = pen.second_split();
    let (v, rep) = laminate_replace(&field, &split, 0.02, &caps).unwrap();
    assert!(rep.lambda_area_exact);
    assert!(rep.sup_within_eps && rep.jump_within_eps);
    // untouched zero cell survives bit-exactly
    assert!(v
        .cells
        .iter()
        .any(|c| c.rect == field.cells[0].rect && c.map == field.cells[0].map));
    // sup-distance measured independently
    let d = field.sup_distance(&v).unwrap();
    assert!(d.value <= 0.02 * (1.0 + 1e-9));
    // gradients on ω are exactly {A_1, -B_1}
    let next = pencil(1);
    for c in &v.cells {
        if c.rect.x0 >= Rat::new(1, 2) {
            let g = &c.map.a;
            assert!(g == &next.a_k || g == &(-next.b_k.clone()), "unexpected gradient {:?}", g);
        }
    }
}

#[test]
fn sawtooth_profile_integrals() {
    // mean over a period matches the exact piecewise integral
    for (l, n) in [(Rat::new(1, 2), Rat::one()), (Rat::new(1, 3), Rat::from_int(4))] {
        let h = sawtooth(&l, &n);
        assert!(h.is_continuous());
        let period = n.recip();
        let lam = l.clone();
        let peak = &(&lam * &(&Rat::one() - &lam)) * &period;
        let (_, mx) = h.min_max();
        assert_eq!(mx, peak);
        // integral = λ(1-λ)/2 · period²? no: triangle area = peak·period/2
        let expect = &(&peak * &period) * &Rat::new(1, 2);
        assert_eq!(h.integral(), expect);
    }
}

#[test]
fn lq_gradient_monotone_in_q_for_big_gradients() {
    // |∇u| = 2 > 1 everywhere: higher q gives larger scan
    let f = PAField::uniform(
        Rect::unit(),
        AffineMap::linear(Mat2::ints(0, 2, 0, 0)),
    );
    let a = lq_gradient(&f, 1.0).value;
    let b = lq_gradient(&f, 2.0).value;
    assert!(b > a);
}

#[test]
fn cantor_quantize_directional_mass_constant_in_level() {
    let u = AffineMap::linear(Mat2::ints(0, 1, 1, 0));
    let omega = Rect::unit();
    let delta = Rat::new(1, 4);
    let mut reference: Option<f64> = None;
    for m in 0..=8 {
        let q = cantor_quantize(&u, &omega, &delta, m).unwrap();
        // directional bulk mass: |A e_i| · TV(profile_i) · transverse extent
        let tvx = q.x_profile.total_variation().to_f64();
        let tvy = q.y_profile.total_variation().to_f64();
        let dir = u.a.col(0).norm() * tvx * omega.height().to_f64()
            + u.a.col(1).norm() * tvy * omega.width().to_f64();
        match reference {
            None => reference = Some(dir),
            Some(r) => assert!((dir - r).abs() <= 1e-9 * r, "level {}: {} vs {}", m, dir, r),
        }
    }
}

#[test]
fn pp_strain_report_on_blend_band() {
    // blended band cell: quadrature path of the strain report
    let caps = Caps::default();
    let f = PPField::from_pa(&PAField::uniform(Rect::unit(), AffineMap::zero()));
    let g = PPField::from_pa(&PAField::uniform(
        Rect::unit(),
        AffineMap::constant(Vec2::e2()),
    ));
    let stair = bdforge::quantize::cutoff_rect(&Rect::unit(), &Rat::new(1, 4), 2).unwrap();
    let psi = CutoffField { pieces: vec![stair] };
    let out = blend(&psi, &f, &g, &caps).unwrap();
    let rep = strain_report_pp(&out).unwrap();
    // continuous blend: no jumps
    assert_eq!(rep.jump_records, 0);
    assert!(rep.bulk_grad_l1.value > 0.0);
}
