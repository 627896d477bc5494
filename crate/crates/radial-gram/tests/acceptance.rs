//! End-to-end acceptance suite: one test per criterion, each printing a
//! single PASS line on success (visible with `--nocapture`).

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radial_gram::campaigns::{
    nu_t_chain_error, parity_identity_error, random_cnd_measure, random_prob_measure,
    random_rplus_cnd_profile, random_rplus_pd_measure, random_word_set,
};
use radial_gram::embedding::{classify_pair, embed, sq_distance, PairCase};
use radial_gram::gram::{check_cnd, check_psd, default_tol, group_gram, semigroup_gram};
use radial_gram::moments::{hankel_feasible, recover_laplace, recover_measure, uniqueness_gap, MomentSequence};
use radial_gram::profiles::{eval_cnd_z, eval_pd_rplus, eval_pd_z, Atom, DiscreteMeasure};
use radial_gram::transfer::{
    build_family_d, build_family_f, build_family_r, radial_to_semigroup, transfer_bound_check,
    FamilySpace, FamilySpec, TransferError,
};
use radial_gram::words::{
    random_coord_vector_with, random_real_word_with, random_word_with, CoordVector, FreeWord,
    GeneratorId, RealFreeWord, Word,
};

fn pass(n: u32, name: &str) {
    println!("criterion {n} ({name}): PASS");
}

/// Every reduced word with at most `max_blocks` blocks, generators
/// `1..=max_gen`, nonzero exponents with magnitude <= `max_exp`.
fn enumerate_words(max_blocks: usize, max_exp: i64, max_gen: u32) -> Vec<FreeWord> {
    let exps: Vec<i64> = (-max_exp..=max_exp).filter(|&k| k != 0).collect();
    let mut out = vec![FreeWord::identity()];
    let mut frontier: Vec<Vec<(GeneratorId, i64)>> = vec![Vec::new()];
    for _ in 0..max_blocks {
        let mut next = Vec::new();
        for stem in &frontier {
            let last = stem.last().map(|b| b.0.index());
            for g in 1..=max_gen {
                if Some(g) == last {
                    continue;
                }
                for &k in &exps {
                    let mut blocks = stem.clone();
                    blocks.push((GeneratorId::new(g).unwrap(), k));
                    out.push(FreeWord::from_blocks(blocks.iter().copied()));
                    next.push(blocks);
                }
            }
        }
        frontier = next;
    }
    out
}

#[test]
fn criterion_01_embedding_isometry() {
    let words = enumerate_words(3, 3, 3);
    assert_eq!(words.len(), 2827);
    let embedded: Vec<_> = words.iter().map(embed).collect();
    let mut case_counts: HashMap<PairCase, u64> = HashMap::new();
    for i in 0..words.len() {
        for j in i..words.len() {
            let d = sq_distance(&embedded[i], &embedded[j]);
            let want = words[i].inverse().mul(&words[j]).sq_length();
            assert_eq!(d, want, "f={} g={}", words[i], words[j]);
            *case_counts.entry(classify_pair(&words[i], &words[j])).or_default() += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    for _ in 0..100_000 {
        let f = random_word_with(&mut rng, 5, 3, 3);
        let g = random_word_with(&mut rng, 5, 3, 3);
        assert_eq!(
            sq_distance(&embed(&f), &embed(&g)),
            f.inverse().mul(&g).sq_length(),
            "f={f} g={g}"
        );
        *case_counts.entry(classify_pair(&f, &g)).or_default() += 1;
    }
    for case in [
        PairCase::Prefix,
        PairCase::OppositeSign,
        PairCase::NewGenerator,
        PairCase::InteriorSplit,
    ] {
        assert!(
            case_counts.get(&case).copied().unwrap_or(0) >= 1000,
            "case {case:?} hit only {:?} times",
            case_counts.get(&case)
        );
    }
    pass(1, "embedding isometry");
}

#[test]
fn criterion_02_pd_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..500 {
        let mu = random_prob_measure(&mut rng, 5, 0.01, 0.01);
        let words = random_word_set(&mut rng, 10, 6);
        let m = group_gram(&words, |g: &FreeWord| {
            eval_pd_z(&mu, u64::try_from(g.sq_length()).unwrap())
        });
        let report = check_psd(&m, default_tol(&m)).unwrap();
        assert!(report.accepted(), "trial {trial}: min_eig {}", report.min_eig);
    }
    pass(2, "integer-radial positive definiteness");
}

#[test]
fn criterion_03_cnd_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..500 {
        let nu = random_cnd_measure(&mut rng, 5);
        let words = random_word_set(&mut rng, 10, 6);
        let psi = |g: &FreeWord| eval_cnd_z(&nu, u64::try_from(g.sq_length()).unwrap());
        let m = group_gram(&words, psi);
        let report = check_cnd(&m, default_tol(&m)).unwrap();
        assert!(report.accepted(), "trial {trial}: max_eig {}", report.max_eig);
        for t in [0.1, 1.0, 10.0] {
            let m = group_gram(&words, |g| (-t * psi(g)).exp());
            let report = check_psd(&m, default_tol(&m)).unwrap();
            assert!(
                report.accepted(),
                "trial {trial} t={t}: min_eig {}",
                report.min_eig
            );
        }
    }
    pass(3, "integer-radial conditional negative definiteness");
}

#[test]
fn criterion_04_inverse_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..200 {
        let k = rng.gen_range(1..=5);
        let mut locs: Vec<f64> = Vec::new();
        while locs.len() < k {
            let cand = rng.gen_range(-1.0..=1.0);
            if locs.iter().all(|l| (l - cand).abs() >= 0.1) {
                locs.push(cand);
            }
        }
        let mut atoms: Vec<Atom> = locs
            .iter()
            .map(|&loc| Atom {
                loc,
                w: rng.gen_range(0.05..1.0),
            })
            .collect();
        atoms.sort_by(|a, b| a.loc.partial_cmp(&b.loc).unwrap());
        let mu = DiscreteMeasure::new(atoms.clone()).unwrap();
        let ms = MomentSequence::of_measure(&mu, 2 * k - 1);
        assert!(hankel_feasible(&ms, 1e-9).unwrap().feasible(), "trial {trial}");
        let rec = recover_measure(&ms, k).unwrap();
        assert_eq!(rec.atoms_found, k, "trial {trial}");
        for (got, want) in rec.measure.atoms().iter().zip(&atoms) {
            assert!(
                (got.loc - want.loc).abs() < 1e-6 && (got.w - want.w).abs() < 1e-6,
                "trial {trial}: got ({}, {}), want ({}, {})",
                got.loc,
                got.w,
                want.loc,
                want.w
            );
        }
        let gap = uniqueness_gap(&ms, k, 3, 4000 + trial).unwrap();
        assert!(gap < 1e-8, "trial {trial}: gap {gap}");
    }
    pass(4, "moment-sequence inverse recovery");
}

#[test]
fn criterion_05_averaging_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ns = [2u32, 4, 8, 16, 32, 64, 128];
    for trial in 0..100 {
        let mu = random_prob_measure(&mut rng, 4, 0.05, 0.05);
        let n = ns[trial % ns.len()];
        let m = rng.gen_range(1..=4);
        let mut targets: Vec<f64> = Vec::new();
        while targets.len() < m {
            let t = rng.gen_range(1..=6) as f64;
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        let c: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let spec = FamilySpec::new(FamilySpace::FreeInt, n, &targets).unwrap();
        let fam = build_family_f(&spec).unwrap();
        let phi = |g: &FreeWord| eval_pd_z(&mu, u64::try_from(g.sq_length()).unwrap());
        let (quad, bound) = transfer_bound_check(phi, &fam, &c, 0.0).unwrap();
        assert!(quad >= bound, "trial {trial}: quad {quad} < bound {bound}");
        if n == 128 {
            let gram = semigroup_gram(&targets, |s| eval_pd_z(&mu, s.round() as u64));
            let psd = check_psd(&gram, default_tol(&gram)).unwrap().accepted();
            assert!(psd, "trial {trial}: semigroup Gram unexpectedly rejected");
            assert!(quad >= -1e-6, "trial {trial}: N=128 quad {quad}");
        }
    }
    pass(5, "averaging inequality with defect");
}

#[test]
fn criterion_06_witness_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ps = [0.5, 1.0, 1.5, 2.0];
    let mut cross_pairs = 0u64;
    while cross_pairs < 10_000 {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(1..=4);
        let int_targets: Vec<f64> = (0..m).map(|_| rng.gen_range(1..=6) as f64).collect();
        let fam = build_family_f(
            &FamilySpec::new(FamilySpace::FreeInt, n, &int_targets).unwrap(),
        )
        .unwrap();
        assert_eq!(fam.max_display_error(), 0.0);
        cross_pairs +=
            (fam.copies() * fam.copies() * fam.targets().len() * fam.targets().len()) as u64;

        let p = ps[rng.gen_range(0..4)];
        let real_targets: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..5.0)).collect();
        let fam_r = build_family_r(
            &FamilySpec::new(FamilySpace::FreeReal(p), n, &real_targets).unwrap(),
        )
        .unwrap();
        assert!(fam_r.max_display_error() <= 1e-12);
        let fam_d = build_family_d(
            &FamilySpec::new(FamilySpace::DirectSum(p), n, &real_targets).unwrap(),
        )
        .unwrap();
        assert!(fam_d.max_display_error() <= 1e-12);
        cross_pairs += 2
            * (fam_r.copies() * fam_r.copies() * fam_r.targets().len() * fam_r.targets().len())
                as u64;
    }
    pass(6, "replicated witness families");
}

#[test]
fn criterion_07_rplus_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ps = [0.5, 1.0, 1.5, 2.0];
    for trial in 0..200 {
        let p = ps[trial % 4];
        let mu = random_rplus_pd_measure(&mut rng, 4);
        let mut real_words = vec![RealFreeWord::identity()];
        let mut coords = vec![CoordVector::identity()];
        for _ in 0..6 {
            let w = random_real_word_with(&mut rng, 4, 2.0, 4);
            if !real_words.contains(&w) {
                real_words.push(w);
            }
            let v = random_coord_vector_with(&mut rng, 3, 2.0, 6);
            if !coords.contains(&v) {
                coords.push(v);
            }
        }
        let m = group_gram(&real_words, |g: &RealFreeWord| {
            eval_pd_rplus(&mu, g.theta(p))
        });
        assert!(check_psd(&m, default_tol(&m)).unwrap().accepted(), "trial {trial} (free-real pd)");
        let m = group_gram(&coords, |g: &CoordVector| eval_pd_rplus(&mu, g.theta(p)));
        assert!(check_psd(&m, default_tol(&m)).unwrap().accepted(), "trial {trial} (direct-sum pd)");

        let psi = random_rplus_cnd_profile(&mut rng, 4);
        let m = group_gram(&real_words, |g: &RealFreeWord| psi.eval(g.theta(p)));
        assert!(check_cnd(&m, default_tol(&m)).unwrap().accepted(), "trial {trial} (free-real cnd)");
        let m = group_gram(&coords, |g: &CoordVector| psi.eval(g.theta(p)));
        assert!(check_cnd(&m, default_tol(&m)).unwrap().accepted(), "trial {trial} (direct-sum cnd)");

        // Laplace round trip: up to 3 well-separated rates plus a jump
        let k = rng.gen_range(1..=3);
        let mut rates: Vec<f64> = Vec::new();
        while rates.len() < k {
            let cand = rng.gen_range(0.2..3.0);
            if rates.iter().all(|r| (r - cand).abs() >= 0.4) {
                rates.push(cand);
            }
        }
        rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let atoms: Vec<Atom> = rates
            .iter()
            .map(|&loc| Atom {
                loc,
                w: rng.gen_range(0.1..1.0),
            })
            .collect();
        let b = if rng.gen_bool(0.5) {
            rng.gen_range(0.1..0.5)
        } else {
            0.0
        };
        let truth = DiscreteMeasure::with_infinity(atoms.clone(), b).unwrap();
        let h = 0.35;
        let samples: Vec<(f64, f64)> = (0..=2 * k)
            .map(|i| {
                let s = i as f64 * h;
                (s, eval_pd_rplus(&truth, s))
            })
            .collect();
        let rec = recover_laplace(&samples, k).unwrap();
        assert_eq!(rec.atoms_found, k, "trial {trial}");
        assert!(
            (rec.measure.infinity_weight() - b).abs() < 1e-5,
            "trial {trial}: jump {} vs {b}",
            rec.measure.infinity_weight()
        );
        for (got, want) in rec.measure.atoms().iter().zip(&atoms) {
            assert!(
                (got.loc - want.loc).abs() < 1e-5 && (got.w - want.w).abs() < 1e-5,
                "trial {trial}: got ({}, {}), want ({}, {})",
                got.loc,
                got.w,
                want.loc,
                want.w
            );
        }
    }
    pass(7, "half-line profiles and Laplace recovery");
}

#[test]
fn criterion_08_parity_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    // 10^4 instances in chunks so a failure localizes
    for chunk in 0..10 {
        let worst = parity_identity_error(&mut rng, 1000);
        assert!(worst < 1e-12, "chunk {chunk}: worst {worst}");
    }
    pass(8, "parity quadratic-form identity");
}

#[test]
fn criterion_09_nu_t_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..100 {
        // fixed-t representing measure supported in (0, 1], normalized
        let n = rng.gen_range(1..=4);
        let atoms: Vec<Atom> = (0..n)
            .map(|_| Atom {
                loc: rng.gen_range(0.05..=1.0),
                w: rng.gen_range(0.05..1.0),
            })
            .collect();
        let mass: f64 = atoms.iter().map(|a| a.w).sum();
        let mu_t = DiscreteMeasure::new(
            atoms
                .iter()
                .map(|a| Atom {
                    loc: a.loc,
                    w: a.w / mass,
                })
                .collect(),
        )
        .unwrap();
        for t in [1.0, 0.1] {
            let err = nu_t_chain_error(&mu_t, t, 10).unwrap();
            assert!(err < 1e-10, "trial {trial} t={t}: err {err}");
        }

        // linear decay of the difference quotient toward psi itself
        let nu = random_cnd_measure(&mut rng, 4);
        let psi = |m: u64| eval_cnd_z(&nu, m);
        let err_at = |t: f64| {
            (0u64..=10)
                .map(|m| ((1.0 - (-t * psi(m)).exp()) / t - psi(m)).abs())
                .fold(0.0f64, f64::max)
        };
        let (e1, e2) = (err_at(0.01), err_at(0.001));
        if e1 > 1e-9 {
            let ratio = e1 / e2;
            assert!(
                (9.0..=11.0).contains(&ratio),
                "trial {trial}: ratio {ratio} (errors {e1}, {e2})"
            );
        }
    }
    pass(9, "difference-quotient measure chain");
}

#[test]
fn criterion_10_negative_controls() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    // chain words e, g1, g1 g2, ... whose pairwise squared distances
    // form the Toeplitz pattern |i - j|
    let chain: Vec<FreeWord> = (0..5)
        .map(|n| FreeWord::from_pairs(&(1..=n).map(|i| (i, 1i64)).collect::<Vec<_>>()))
        .collect();
    for trial in 0..100 {
        // an atom outside [-1, 1] fails positive definiteness
        let mag = rng.gen_range(1.05..2.0);
        let s = if rng.gen_bool(0.5) { mag } else { -mag };
        let mu = DiscreteMeasure::point_mass(s, 1.0).unwrap();
        let m = group_gram(&chain, |g: &FreeWord| {
            eval_pd_z(&mu, u64::try_from(g.sq_length()).unwrap())
        });
        assert!(
            !check_psd(&m, default_tol(&m)).unwrap().accepted(),
            "trial {trial}: atom at {s} accepted"
        );

        // |m_1| > m_0 fails boundedness (and feasibility)
        let m0 = rng.gen_range(0.1..1.0);
        let m1 = m0 * rng.gen_range(1.01..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let ms = MomentSequence::new(vec![m0, m1]).unwrap();
        let rep = hankel_feasible(&ms, 1e-9).unwrap();
        assert!(!rep.feasible(), "trial {trial}: ({m0}, {m1}) feasible");

        // a function of the leading generator index is not radial
        let phi = |g: &FreeWord| {
            (-(g.blocks().first().map(|b| b.0.index()).unwrap_or(0) as f64)).exp()
        };
        let g1 = rng.gen_range(1..=20u32);
        let g2 = loop {
            let g = rng.gen_range(1..=20u32);
            if g != g1 {
                break g;
            }
        };
        let probes = vec![(
            1.0,
            vec![FreeWord::from_pairs(&[(g1, 1)]), FreeWord::from_pairs(&[(g2, 1)])],
        )];
        assert!(
            matches!(
                radial_to_semigroup(phi, &probes),
                Err(TransferError::NotRadial { .. })
            ),
            "trial {trial}: non-radial function accepted"
        );
    }
    pass(10, "negative controls");
}
