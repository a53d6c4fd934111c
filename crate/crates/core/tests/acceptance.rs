//! Acceptance suite: one line per criterion with its tolerance and time
//! budget. Exits nonzero when any criterion fails.

use std::time::{Duration, Instant};

use colorgns::catalog::{
    clifford_rep, counterexample_prerep, random_character, random_color_algebra, random_cyclic_rep,
    random_gamma_space, random_graded_space, random_graded_unitary, random_homogeneous, random_perfect_rep, rng,
    glv_defining,
};
use colorgns::color_lie::{check_axioms, check_perfectness, glv};
use colorgns::enveloping::{Enveloping, Monoid, MonoidElement, RewriteStrategy};
use colorgns::gns::{
    default_group_samples, gns_roundtrip, GnsOptions, SampleSet,
};
use colorgns::graded_linear::{check_gamma_form, dagger_adjoint, star_adjoint, tensor_inner, GammaInnerSpace};
use colorgns::grading::{verify_alpha_cocycle, verify_lifting_relation, Character, Degree};
use colorgns::hc_rep::{
    check_intertwiner, check_unitary_rep, matrix_coefficient, pi_matrix, rho_env, stability_extend, twist_rep,
    GroupElement, HcPair, UnitaryRep,
};
use colorgns::linalg::{self, c, rel_residual, rel_residual_vec, CMat, CVec, C64};
use colorgns::Error;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn run(id: u32, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let in_time = took <= budget;
    let ok = out.passed && in_time;
    println!(
        "criterion {id:>2} [{}] {title}: {} ({:.2}s of {}s)",
        if ok { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64(),
        budget.as_secs()
    );
    ok
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn sign_calculus() -> Outcome {
    let mut pairs = 0;
    let mut violations = 0;
    for n in 1..=4u8 {
        let mut twists = vec![None];
        twists.extend(Character::all(n).map(Some));
        for chi in &twists {
            let p = verify_alpha_cocycle(n, chi.as_ref()).unwrap();
            pairs += p.pairs_checked;
            violations += p.violations.len();
        }
    }
    Outcome {
        passed: violations == 0,
        detail: format!("{violations} violations over {pairs} pairs (untwisted and every twist, n = 1..4)"),
    }
}

fn lifting() -> Outcome {
    let mut pairs = 0;
    let mut violations = 0;
    for n in 1..=3u8 {
        let p = verify_lifting_relation(n).unwrap();
        pairs += p.pairs_checked;
        violations += p.violations.len();
    }
    Outcome {
        passed: violations == 0,
        detail: format!("{violations} violations over {pairs} pairs (n = 1..3)"),
    }
}

fn random_space(g: &mut ChaCha8Rng) -> GammaInnerSpace {
    let n = g.gen_range(1..=3u8);
    let sp = random_graded_space(g, n, 3, usize::MAX);
    let twisted = g.gen_bool(0.5);
    random_gamma_space(g, sp, twisted)
}

fn adjoints() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut g = rng(301);
    let (mut dd, mut prod, mut star, mut form) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let h = random_space(&mut g);
        let sp = &h.space;
        let n = sp.rank();
        let ds = Degree::from_index(n, g.gen_range(0..1usize << n));
        let dt = Degree::from_index(n, g.gen_range(0..1usize << n));
        let s = random_homogeneous(&mut g, sp, sp, ds);
        let t = random_homogeneous(&mut g, sp, sp, dt);
        let td = dagger_adjoint(&h, &t).unwrap();
        dd = dd.max(rel_residual(&dagger_adjoint(&h, &td).unwrap().matrix, &t.matrix));
        let st = s.compose(&t).unwrap();
        let lhs = dagger_adjoint(&h, &st).unwrap().matrix;
        let rhs = td.compose(&dagger_adjoint(&h, &s).unwrap()).unwrap().matrix * ds.commutation(dt).to_c64();
        prod = prod.max(rel_residual(&lhs, &rhs));
        let ts = star_adjoint(&h, &t).unwrap().matrix;
        star = star.max(rel_residual(&ts, &(&td.matrix * h.phase(dt).conj())));
        // defining property on homogeneous vectors: <v, T w> = beta(|T|, |v|) <T† v, w>
        let dv = Degree::from_index(n, g.gen_range(0..1usize << n));
        let dw = Degree::from_index(n, g.gen_range(0..1usize << n));
        let v = sp.project(&linalg::random_complex(&mut g, sp.total_dim(), 1).column(0).into_owned(), dv);
        let w = sp.project(&linalg::random_complex(&mut g, sp.total_dim(), 1).column(0).into_owned(), dw);
        let a = h.gamma_inner(&v, &t.apply(&w));
        let b = h.gamma_inner(&td.apply(&v), &w) * dt.commutation(dv).to_c64();
        let scale = 1.0f64.max(v.norm() * w.norm() * linalg::frob(&t.matrix));
        form = form.max((a - b).norm() / scale);
    }
    let worst = dd.max(prod).max(star).max(form);
    Outcome {
        passed: worst <= TOL,
        detail: format!(
            "T†† = T {dd:.1e}, (ST)† {prod:.1e}, T* = conj(alpha) T† {star:.1e}, defining identity {form:.1e} (tol {TOL:e})"
        ),
    }
}

fn glv_axioms() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut g = rng(401);
    let mut worst = 0.0f64;
    let mut failed = 0;
    let mut biggest = 0;
    for _ in 0..50 {
        let n = g.gen_range(1..=3u8);
        let v = random_graded_space(&mut g, n, 2, usize::MAX);
        let (alg, _) = glv(&v).unwrap();
        biggest = biggest.max(alg.dim());
        let r = check_axioms(&alg, TOL);
        worst = worst.max(r.max_residual());
        failed += usize::from(!r.passed);
    }
    Outcome {
        passed: failed == 0 && worst < TOL,
        detail: format!("{failed} of 50 failed, max residual {worst:.1e} (tol {TOL:e}), largest dim {biggest}"),
    }
}

fn tensor_positivity() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut g = rng(501);
    let mut failed = 0;
    let mut min_eig = f64::INFINITY;
    let mut kron = 0.0f64;
    for _ in 0..100 {
        let n = g.gen_range(1..=2u8);
        let twisted = g.gen_bool(0.5);
        let chi = random_character(&mut g, n);
        let mk = |g: &mut ChaCha8Rng| {
            let sp = random_graded_space(g, n, 2, usize::MAX);
            let h = random_gamma_space(g, sp, false);
            if twisted {
                h.twisted(&chi)
            } else {
                h
            }
        };
        let (h, k) = (mk(&mut g), mk(&mut g));
        let (t, tp) = tensor_inner(&h, &k).unwrap();
        let forms: Vec<CMat> = Degree::all(n).map(|a| t.gamma_form(a)).collect();
        let r = check_gamma_form(&t.space, &forms, &t.twist(), TOL);
        failed += usize::from(!r.passed);
        for a in Degree::all(n) {
            if t.space.dim(a) > 0 {
                min_eig = min_eig.min(linalg::min_eigenvalue(t.gram(a)));
            }
        }
        // the ordinary Gram is the Kronecker product of the factors' Grams
        let (gh, gk) = (h.ordinary_gram(), k.ordinary_gram());
        let full = t.ordinary_gram();
        let (nh, nk) = (gh.nrows(), gk.nrows());
        for i in 0..nh {
            for j in 0..nk {
                for i2 in 0..nh {
                    for j2 in 0..nk {
                        let e = full[(tp.index_of(i, j), tp.index_of(i2, j2))] - gh[(i, i2)] * gk[(j, j2)];
                        kron = kron.max(e.norm());
                    }
                }
            }
        }
    }
    Outcome {
        passed: failed == 0 && min_eig > 0.0 && kron < TOL,
        detail: format!(
            "{failed} of 100 failed (i)-(iii) at {TOL:e}, min Gram eigenvalue {min_eig:.3e}, Kronecker oracle {kron:.1e}"
        ),
    }
}

fn pbw() -> Outcome {
    const TOL: f64 = 1e-8;
    const REP_TOL: f64 = 1e-9;
    let mut g = rng(601);
    let mut worst = 0.0f64;
    let mut words = 0;
    let mut errors = 0;
    for _ in 0..20 {
        let l = random_color_algebra(&mut g, 6);
        assert!(check_axioms(&l, 1e-10).passed);
        let left = Enveloping::new(&l).with_strategy(RewriteStrategy::Leftmost);
        let right = Enveloping::new(&l).with_strategy(RewriteStrategy::Rightmost);
        for _ in 0..25 {
            let len = g.gen_range(0..=6);
            let w: Vec<usize> = (0..len).map(|_| g.gen_range(0..l.dim())).collect();
            words += 1;
            match (left.normal_form(&w), right.normal_form(&w)) {
                (Ok(a), Ok(b)) => worst = worst.max(a.distance(&b)),
                _ => errors += 1,
            }
        }
    }
    let mut rep_worst = 0.0f64;
    for _ in 0..20 {
        let n = g.gen_range(1..=2u8);
        let v = random_graded_space(&mut g, n, 2, 3);
        let (alg, mats) = glv(&v).unwrap();
        let rep = UnitaryRep::new(
            HcPair::connected(alg.clone()),
            GammaInnerSpace::standard(v.clone()),
            mats.clone(),
            vec![],
        )
        .unwrap();
        let env = Enveloping::new(&alg);
        for _ in 0..10 {
            let len = g.gen_range(0..=5);
            let w: Vec<usize> = (0..len).map(|_| g.gen_range(0..alg.dim())).collect();
            let direct = w.iter().fold(linalg::eye(v.total_dim()), |acc, &i| acc * &mats[i]);
            let nf = rho_env(&rep, &env.normal_form(&w).unwrap()).unwrap();
            rep_worst = rep_worst.max(rel_residual(&nf, &direct));
        }
    }
    Outcome {
        passed: errors == 0 && worst <= TOL && rep_worst <= REP_TOL,
        detail: format!(
            "{words} words over 20 algebras: strategy gap {worst:.1e} (tol {TOL:e}), {errors} errors; gl(V) rho(normal form) vs product {rep_worst:.1e} (tol {REP_TOL:e})"
        ),
    }
}

fn random_env(g: &mut ChaCha8Rng, dim: usize, max_len: usize) -> Vec<(Vec<usize>, C64)> {
    (0..g.gen_range(1..=3))
        .map(|_| {
            let len = g.gen_range(0..=max_len);
            let w = (0..len).map(|_| g.gen_range(0..dim)).collect();
            (w, c(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)))
        })
        .collect()
}

fn random_group(g: &mut ChaCha8Rng, pair: &HcPair) -> GroupElement {
    let zero: Vec<usize> = pair.algebra.sector(Degree::zero(pair.algebra.rank())).collect();
    let mut out = GroupElement::identity();
    for _ in 0..g.gen_range(0..=2) {
        let f = if !pair.extras.is_empty() && g.gen_bool(0.5) {
            let e = GroupElement::extra(g.gen_range(0..pair.extras.len()));
            if g.gen_bool(0.5) {
                e.inverse()
            } else {
                e
            }
        } else {
            GroupElement::exp(zero[g.gen_range(0..zero.len())], g.gen_range(-1.0..1.0))
        };
        out = out.mul(&f);
    }
    out
}

fn star_monoid() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut g = rng(701);
    let (mut dstar, mut prod, mut sstar, mut assoc) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    let reps = [
        clifford_rep().0,
        {
            let v = random_graded_space(&mut g, 2, 1, 3);
            let w = random_graded_unitary(&mut g, &v);
            glv_defining(&v, &[w]).unwrap()
        },
    ];
    while count < 200 {
        let rep = &reps[count % 2];
        let pair = &rep.pair;
        let l = &pair.algebra;
        let twist = random_character(&mut g, l.rank());
        let env = Enveloping::new(l).with_cap(14).with_twist(twist);
        let monoid = Monoid::with_env(pair, Enveloping::new(l).with_cap(14).with_twist(twist));
        let d1 = env.from_words(&random_env(&mut g, l.dim(), 3)).unwrap();
        let d2 = env.from_words(&random_env(&mut g, l.dim(), 3)).unwrap();
        dstar = dstar.max(env.star(&env.star(&d1).unwrap()).unwrap().distance(&d1));
        let lhs = env.star(&env.mul(&d1, &d2).unwrap()).unwrap();
        let rhs = env.mul(&env.star(&d2).unwrap(), &env.star(&d1).unwrap()).unwrap();
        prod = prod.max(lhs.distance(&rhs));
        let mk = |g: &mut ChaCha8Rng| {
            let grp = random_group(g, pair);
            let d = env.from_words(&random_env(g, l.dim(), 2)).unwrap();
            MonoidElement::new(grp, d)
        };
        let (s, t, u) = (mk(&mut g), mk(&mut g), mk(&mut g));
        let st = monoid.mul(&s, &t).unwrap();
        let lhs = monoid.star(&st).unwrap();
        let rhs = monoid.mul(&monoid.star(&t).unwrap(), &monoid.star(&s).unwrap()).unwrap();
        sstar = sstar.max(lhs.distance(&rhs));
        let a = monoid.mul(&st, &u).unwrap();
        let b = monoid.mul(&s, &monoid.mul(&t, &u).unwrap()).unwrap();
        assoc = assoc.max(a.distance(&b));
        count += 1;
    }
    let worst = dstar.max(prod).max(sstar).max(assoc);
    Outcome {
        passed: worst <= TOL,
        detail: format!(
            "{count} samples: D** {dstar:.1e}, (D1D2)* {prod:.1e}, (st)* {sstar:.1e}, associativity {assoc:.1e} (tol {TOL:e})"
        ),
    }
}

fn stability() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut g = rng(801);
    let mut worst = 0.0f64;
    let mut dep = 0.0f64;
    let mut errors = Vec::new();
    for k in 0..20 {
        let rep = random_perfect_rep(&mut g, 8);
        let l = rep.algebra();
        match stability_extend(&rep.restrict(), TOL) {
            Ok((ext, info)) => {
                for i in 0..l.dim() {
                    let a = l.degree(i);
                    if !a.is_zero() && !a.is_odd_like() {
                        worst = worst.max(rel_residual(&ext.rho[i].matrix, &rep.rho[i].matrix));
                    }
                }
                dep = info.records.iter().fold(dep, |m, r| m.max(r.dependence_residual));
            }
            Err(e) => errors.push(format!("rep {k}: {e}")),
        }
    }
    Outcome {
        passed: errors.is_empty() && worst <= TOL && dep <= TOL,
        detail: format!(
            "20 reps: even-like recovery {worst:.1e}, decomposition dependence {dep:.1e} (tol {TOL:e}){}",
            if errors.is_empty() { String::new() } else { format!("; errors: {}", errors.join("; ")) }
        ),
    }
}

fn negative_control() -> Outcome {
    let p = counterexample_prerep();
    let perf = check_perfectness(&p.pair.algebra);
    let fail = perf.first_failure().cloned();
    let at_11 = fail
        .as_ref()
        .is_some_and(|f| f.sector == Degree::from_index(2, 3) && f.rank == 0 && f.dim == 1);
    let refused = match stability_extend(&p, 1e-9) {
        Err(e @ Error::NotPerfect { .. }) => e.to_string().contains("perfectness"),
        _ => false,
    };
    Outcome {
        passed: !perf.passed() && at_11 && refused,
        detail: format!(
            "perfectness fails at {} (rank {} vs dim {}), extension refused: {refused}",
            fail.as_ref().map(|f| f.sector.to_string()).unwrap_or_default(),
            fail.as_ref().map_or(0, |f| f.rank),
            fail.as_ref().map_or(0, |f| f.dim),
        ),
    }
}

/// Brute-force cyclic span: rank of `π(g) ρ(x_{i1}) ⋯ ρ(x_{ik}) v` over all
/// words up to the dimension and the default group samples.
fn brute_cyclic_dim(r: &UnitaryRep, v: &CVec) -> usize {
    let d = r.dim();
    let mut layer = vec![v.clone()];
    let mut all = vec![v.clone()];
    let mut rank = linalg::numerical_rank_c(&CMat::from_columns(&all), 1e-10);
    for _ in 0..d {
        let mut next = Vec::new();
        for w in &layer {
            for m in &r.rho {
                next.push(&m.matrix * w);
            }
        }
        // keep the layer small: an orthonormal basis of its span
        let stack = CMat::from_columns(&next);
        let svd = stack.svd(true, false);
        let u = svd.u.unwrap();
        let top = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
        layer = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > 1e-10 * top.max(1e-300))
            .map(|k| u.column(k).into_owned())
            .collect();
        all.extend(layer.iter().cloned());
        let new_rank = linalg::numerical_rank_c(&CMat::from_columns(&all), 1e-10);
        if new_rank == rank {
            break;
        }
        rank = new_rank;
    }
    let mut imgs = all.clone();
    for s in default_group_samples(&r.pair) {
        let p = pi_matrix(r, &s).unwrap();
        imgs.extend(all.iter().map(|w| &p * w));
    }
    linalg::numerical_rank_c(&CMat::from_columns(&imgs), 1e-10)
}

fn gns() -> Outcome {
    const PD_TOL: f64 = 1e-8;
    const EQ_TOL: f64 = 1e-6;
    let mut g = rng(1001);
    let mut cases: Vec<(String, UnitaryRep, CVec)> = Vec::new();
    for k in 0..10 {
        let (r, v, kind) = random_cyclic_rep(&mut g, 12);
        cases.push((format!("random {k} ({kind:?}, dim {})", r.dim()), r, v));
    }
    let (r, v) = clifford_rep();
    cases.push(("Clifford".into(), r, v));
    let mut problems = Vec::new();
    let (mut pd_worst, mut eq_worst, mut tv_worst) = (0.0f64, 0.0f64, 0.0f64);
    let mut dims = Vec::new();
    for (name, r, v0) in &cases {
        let opts = GnsOptions::default();
        let rt = match gns_roundtrip(r, v0, &opts) {
            Ok(rt) => rt,
            Err(e) => {
                problems.push(format!("{name}: {e}"));
                continue;
            }
        };
        // the roundtrip ran check_positive_definite on the sample set at the stabilized level
        let pd: Vec<_> = rt.report.checks.iter().filter(|c| c.name.starts_with("positive definiteness")).collect();
        let neg = pd
            .iter()
            .find(|c| c.name.contains("(ii) Gram min"))
            .map_or(f64::INFINITY, |c| c.residual);
        pd_worst = pd_worst.max(neg);
        if pd.is_empty() || pd.iter().any(|c| !c.passed) {
            problems.push(format!("{name}: positive-definiteness fails"));
        }
        let oracle = brute_cyclic_dim(r, v0);
        if rt.gns.rep.dim() != oracle {
            problems.push(format!("{name}: reconstruction dim {} vs cyclic span {oracle}", rt.gns.rep.dim()));
        }
        dims.push(rt.gns.rep.dim());
        let eq = &rt.equivalence;
        let e = eq.report.checks.iter().filter(|c| !c.name.contains("T v1")).fold(0.0f64, |m, c| m.max(c.residual));
        eq_worst = eq_worst.max(e);
        let tv = rel_residual_vec(&(&eq.intertwiner * v0), &rt.gns.cyclic);
        tv_worst = tv_worst.max(tv);
        if !rt.report.passed {
            problems.push(format!("{name}: roundtrip report fails"));
        }
    }
    Outcome {
        passed: problems.is_empty() && pd_worst <= PD_TOL && eq_worst < EQ_TOL && tv_worst < EQ_TOL,
        detail: format!(
            "{} cases, dims {dims:?}: PD negativity {pd_worst:.1e} (tol {PD_TOL:e}), equivalence {eq_worst:.1e}, T v0 {tv_worst:.1e} (tol {EQ_TOL:e}){}",
            cases.len(),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    }
}

fn support() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut g = rng(1101);
    let mut worst = 0.0f64;
    let mut sampled = 0;
    for _ in 0..10 {
        let (r, _, _) = random_cyclic_rep(&mut g, 8);
        let sp = &r.space.space;
        let degs: Vec<Degree> = sp.support().collect();
        let a = degs[g.gen_range(0..degs.len())];
        let x = linalg::random_complex(&mut g, sp.total_dim(), 1).column(0).into_owned();
        let v = sp.project(&x, a);
        let set = SampleSet::generate(&r.pair, &default_group_samples(&r.pair), 2);
        for (s, d) in set.elements.iter().zip(&set.degrees) {
            if d.is_zero() {
                continue;
            }
            sampled += 1;
            let val = matrix_coefficient(&r, &v, &v, s).unwrap();
            worst = worst.max(val.norm());
        }
    }
    Outcome {
        passed: worst < TOL,
        detail: format!("{sampled} samples off S_0: max |phi_vv| {worst:.1e} (tol {TOL:e})"),
    }
}

fn twist() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut g = rng(1201);
    let mut mismatches = Vec::new();
    let mut inter = 0.0f64;
    let mut restored = true;
    for k in 0..10 {
        let r = if k % 2 == 0 { clifford_rep().0 } else { random_perfect_rep(&mut g, 6) };
        let chi = random_character(&mut g, r.algebra().rank());
        let before = check_unitary_rep(&r, TOL);
        let tw = twist_rep(&r, &chi);
        let after = check_unitary_rep(&tw, TOL);
        if before.passed != after.passed {
            let first = after.failures().next().map(|c| c.name.clone()).unwrap_or_default();
            mismatches.push(format!("chi mask {}: {} -> {} ({first})", chi.mask(), before.passed, after.passed));
        }
        let u = random_graded_unitary(&mut g, &r.space.space);
        let r2 = r.transport(&u).unwrap();
        let ci = check_intertwiner(&u, &twist_rep(&r, &chi), &twist_rep(&r2, &chi), TOL);
        inter = inter.max(ci.max_residual());
        let back = twist_rep(&tw, &chi);
        restored &= back.space.twist() == r.space.twist()
            && back.rho.iter().zip(&r.rho).all(|(a, b)| a.matrix == b.matrix)
            && back.space.grams() == r.space.grams();
    }
    Outcome {
        passed: mismatches.is_empty() && inter < TOL && restored,
        detail: format!(
            "verdict changes {} of 10{}; intertwiner {inter:.1e} (tol {TOL:e}); double twist exact: {restored}",
            mismatches.len(),
            if mismatches.is_empty() { String::new() } else { format!(" [{}]", mismatches.join("; ")) }
        ),
    }
}

fn main() {
    let results = [
        run(1, "sign calculus: alpha cocycle", secs(1), sign_calculus),
        run(2, "lifting relation beta/delta = d eta", secs(1), lifting),
        run(3, "adjoint suite", secs(5), adjoints),
        run(4, "gl(V) axioms", secs(30), glv_axioms),
        run(5, "tensor positivity", secs(10), tensor_positivity),
        run(6, "PBW confluence", secs(60), pbw),
        run(7, "star and monoid", secs(10), star_monoid),
        run(8, "stability roundtrip", secs(60), stability),
        run(9, "negative control", secs(1), negative_control),
        run(10, "GNS roundtrip", secs(120), gns),
        run(11, "support condition", secs(5), support),
        run(12, "twist functor", secs(10), twist),
    ];
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
