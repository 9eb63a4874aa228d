//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with --nocapture) and enforcing its runtime
//! budget. Random instances draw from fixed seeds so every run sees the
//! same cases.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use juntalab::continuous::{self, Monotonicity};
use juntalab::functions;
use juntalab::influence;
use juntalab::junta::{self, ErrorNorm};
use juntalab::semigroup::{self, LsiMethod};
use juntalab::slice;
use juntalab::spaces::{self, Factor};

struct Criterion {
    number: u32,
    what: &'static str,
    budget: Duration,
    started: Instant,
}

impl Criterion {
    fn start(number: u32, what: &'static str, budget_secs: u64) -> Self {
        Criterion {
            number,
            what,
            budget: Duration::from_secs(budget_secs),
            started: Instant::now(),
        }
    }

    fn finish(self) {
        let elapsed = self.started.elapsed();
        let pass = elapsed <= self.budget;
        println!(
            "criterion {:02} [{}] {} ({:.2?} of {:?})",
            self.number,
            if pass { "PASS" } else { "FAIL" },
            self.what,
            elapsed,
            self.budget
        );
        assert!(
            pass,
            "criterion {} exceeded its {:?} budget: {:.2?}",
            self.number, self.budget, elapsed
        );
    }
}

#[test]
fn criterion_01_product_gap_is_one() {
    let c = Criterion::start(1, "product spectral gap = 1", 5);
    for n in 1..=8 {
        for &p in &[0.3, 0.5, 0.7] {
            let s = spaces::build_biased_cube(n, p).unwrap();
            let gap = semigroup::spectral_gap(&semigroup::generator(&s)).unwrap();
            assert!(
                (gap - 1.0).abs() <= 1e-9,
                "cube n={n} p={p}: gap {gap}"
            );
        }
    }
    let products: Vec<Vec<Factor>> = vec![
        vec![
            Factor {
                values: vec![-1.0, 0.0, 2.0],
                measure: vec![0.2, 0.3, 0.5],
            },
            Factor {
                values: vec![-1.0, 1.0],
                measure: vec![0.4, 0.6],
            },
        ],
        vec![
            Factor {
                values: vec![0.0, 1.0, 2.0, 3.0],
                measure: vec![0.25; 4],
            },
            Factor {
                values: vec![-2.0, 5.0],
                measure: vec![0.9, 0.1],
            },
            Factor {
                values: vec![0.0, 1.0],
                measure: vec![0.5, 0.5],
            },
        ],
        vec![Factor {
            values: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            measure: vec![0.1, 0.2, 0.3, 0.25, 0.15],
        }],
    ];
    for factors in products {
        let s = spaces::build_product(factors).unwrap();
        let gap = semigroup::spectral_gap(&semigroup::generator(&s)).unwrap();
        assert!((gap - 1.0).abs() <= 1e-9, "product gap {gap}");
    }
    c.finish();
}

#[test]
fn criterion_02_torus_gap_closed_form() {
    let c = Criterion::start(2, "torus rescaled gap (1-cos(2pi/m))/2", 5);
    for m in 2..=8usize {
        let s = spaces::build_torus(1, m).unwrap();
        let gap = semigroup::spectral_gap(&semigroup::generator(&s)).unwrap();
        let want = (1.0 - (2.0 * std::f64::consts::PI / m as f64).cos()) / 2.0;
        assert!((gap - want).abs() <= 1e-9, "torus m={m}: gap {gap} want {want}");
        if m == 2 {
            assert!((gap - 1.0).abs() <= 1e-12, "torus m=2 gap {gap} should be 1");
        }
    }
    c.finish();
}

#[test]
fn criterion_03_two_point_lsi() {
    let c = Criterion::start(3, "two-point log-Sobolev closed form vs search", 30);
    for &p in &[0.5, 0.7, 0.9] {
        let s = spaces::build_biased_cube(1, p).unwrap();
        let gen = semigroup::generator(&s);
        let exact = semigroup::log_sobolev_constant(&gen, LsiMethod::ExactTwoPoint).unwrap();
        let numeric = semigroup::log_sobolev_constant(
            &gen,
            LsiMethod::NumericSearch {
                iters_per_start: semigroup::DEFAULT_SEARCH_ITERS,
            },
        )
        .unwrap();
        assert!(
            (exact - numeric).abs() <= 1e-4,
            "p={p}: exact {exact} vs numeric {numeric}"
        );
        if p == 0.5 {
            assert!((exact - 1.0).abs() <= 1e-6, "p=0.5 constant {exact}");
        }
    }
    c.finish();
}

#[test]
fn criterion_04_hypercontractivity_suite() {
    let c = Criterion::start(4, "hypercontractivity, 200 random instances/family", 60);
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    // three families; each instance draws (space, f, t, q)
    for family in 0..3 {
        for i in 0..200 {
            let space = match family {
                0 => {
                    let n = rng.gen_range(1..=8);
                    let p = rng.gen_range(0.2..0.8);
                    spaces::build_biased_cube(n, p).unwrap()
                }
                1 => {
                    let n = rng.gen_range(1..=3);
                    let m = rng.gen_range(2..=4);
                    spaces::build_torus(n, m).unwrap()
                }
                _ => {
                    let n = rng.gen_range(2..=6);
                    let k = rng.gen_range(1..n);
                    spaces::build_slice(n, k).unwrap()
                }
            };
            let gen = semigroup::generator(&space);
            let rho = semigroup::certified_lsi_floor(&gen).unwrap();
            let f = functions::random_table(&space, rng.gen());
            let t = rng.gen_range(0.01..2.0);
            let q = rng.gen_range(1.1..4.0);
            let rep = semigroup::hypercontractivity_check(&gen, rho, &f, t, q).unwrap();
            assert!(
                rep.slack >= -1e-9,
                "family {family} instance {i}: slack {} (t={t}, q={q}, {})",
                rep.slack,
                space.kind.describe()
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_05_la_and_bakry_suites() {
    let c = Criterion::start(5, "smoothed-projection and short-time bounds, 200 each", 60);
    // spaces built once so the spectral data is shared across instances
    let spaces_and_gens: Vec<_> = (5..=10)
        .map(|n| spaces::build_biased_cube(n, 0.5).unwrap())
        .collect();
    let gens: Vec<_> = spaces_and_gens
        .iter()
        .map(semigroup::generator)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut la_done = 0;
    while la_done < 200 {
        let idx = rng.gen_range(0..gens.len());
        let space = &spaces_and_gens[idx];
        let f = functions::random_table(space, rng.gen());
        let t = rng.gen_range(0.05..1.5);
        let eta = rng.gen_range(0.02..0.5);
        // the bound assumes max_i |L_i f|_inf = 1 and total influence >= 1
        let profile = influence::influence_profile(space, &f).unwrap();
        let scale = profile.max_sup_norm();
        let scaled: Vec<f64> = f.iter().map(|v| v / scale).collect();
        let scaled_total = influence::influence_profile(space, &scaled).unwrap().total;
        if scaled_total < 1.0 {
            continue;
        }
        let rep = junta::lemma_la_check(space, &gens[idx], 1.0, &scaled, eta, t).unwrap();
        assert!(
            rep.slack >= -rep.tolerance,
            "la instance {la_done}: slack {} (n={}, t={t}, eta={eta})",
            rep.slack,
            space.n_directions()
        );
        la_done += 1;
    }
    for i in 0..200 {
        let idx = rng.gen_range(0..gens.len());
        let space = &spaces_and_gens[idx];
        let f = functions::random_table(space, rng.gen());
        let t = rng.gen_range(0.05..1.5);
        let rep = junta::bakry_check(&gens[idx], &f, t).unwrap();
        assert!(
            rep.slack >= -rep.tolerance,
            "bakry instance {i}: slack {} (n={}, t={t})",
            rep.slack,
            space.n_directions()
        );
    }
    c.finish();
}

#[test]
fn criterion_06_extraction_soundness() {
    let c = Criterion::start(6, "50 planted juntas recovered with certificates", 120);
    let space = spaces::build_biased_cube(10, 0.5).unwrap();
    let gen = semigroup::generator(&space);
    let noise_levels = [0.0, 0.005, 0.01, 0.02];
    for i in 0..50u64 {
        let k = 1 + (i as usize) % 3;
        let noise = noise_levels[(i as usize) % noise_levels.len()];
        let (f, planted) = functions::planted_junta(&space, k, noise, 2000 + i).unwrap();
        let (_, cert) = junta::extract_junta(&space, &gen, 1.0, &f, 0.1, ErrorNorm::L2).unwrap();
        for coord in &planted {
            assert!(
                cert.kept_set.contains(coord),
                "instance {i}: planted {planted:?} not inside kept {:?}",
                cert.kept_set
            );
        }
        assert!(
            cert.measured_error <= 0.1,
            "instance {i}: error {}",
            cert.measured_error
        );
        if cert.eta > 0.0 {
            let total = influence::influence_profile(&space, &f).unwrap().total;
            let scale = influence::influence_profile(&space, &f)
                .unwrap()
                .max_sup_norm();
            // the certificate's eta thresholds the influences of f scaled
            // to unit sup-norm; compare in the same scale
            let bound = (total / scale) / cert.eta + 1e-9;
            assert!(
                (cert.kept_set.len() as f64) <= bound,
                "instance {i}: kept {} > I/eta = {bound}",
                cert.kept_set.len()
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_07_slice_spectra() {
    let c = Criterion::start(7, "slice walk spectra match the closed multiset", 30);
    for n in 2..=8usize {
        for k in 1..n {
            let space = spaces::build_slice(n, k).unwrap();
            let rep = slice::spectrum_check(&space).unwrap();
            assert!(
                rep.left <= 1e-8,
                "slice({n},{k}): worst eigenvalue deviation {}",
                rep.left
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_08_slice_basis() {
    let c = Criterion::start(8, "slice basis orthogonality/Parseval/influences", 60);
    for &(n, k) in &[(4usize, 2usize), (5, 2), (6, 3)] {
        let space = spaces::build_slice(n, k).unwrap();
        let basis = slice::build_basis(n, k).unwrap();
        assert_eq!(basis.entries.len(), space.n_states, "slice({n},{k}) dimension");
        let mut worst = 0.0f64;
        for (a, ea) in basis.entries.iter().enumerate() {
            for eb in basis.entries.iter().skip(a + 1) {
                worst = worst.max(space.inner(&ea.table, &eb.table).abs());
            }
        }
        assert!(worst <= 1e-9, "slice({n},{k}) orthogonality {worst}");
        for trial in 0..20u64 {
            let f = functions::random_table(&space, 800 + trial);
            let coeffs = slice::fourier_expand(&basis, &f).unwrap();
            let back = slice::reconstruct(&basis, &coeffs).unwrap();
            let err = f
                .iter()
                .zip(&back)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            assert!(err <= 1e-9, "slice({n},{k}) trial {trial}: reconstruction {err}");
            let lhs = space.l2_norm_sq(&f);
            let rhs: f64 = coeffs
                .iter()
                .zip(&basis.entries)
                .map(|(c, e)| c * c * e.norm_sq)
                .sum();
            assert!(
                (lhs - rhs).abs() <= 1e-9,
                "slice({n},{k}) trial {trial}: parseval {lhs} vs {rhs}"
            );
            let rep = slice::influence_identity_check(&basis, &space, &f, n).unwrap();
            assert!(
                (rep.left - rep.right).abs() <= 1e-8,
                "slice({n},{k}) trial {trial}: influence identity {} vs {}",
                rep.left,
                rep.right
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_09_gaussian_continuous_suite() {
    let c = Criterion::start(9, "gaussian grid: decay, half-space, inequalities", 180);
    // eigenfunction decay through the grid path
    let line = continuous::gaussian_model(513).unwrap();
    let psi = continuous::hermite_table(line.nodes(), 12);
    for &t in &[0.25, 0.7, 1.4] {
        for (k, table) in psi.iter().enumerate().skip(1) {
            let evolved = continuous::evolve_line_grid(&line, table, t).unwrap();
            let measured = line.inner(&evolved, table) / line.l2_norm_sq(table);
            let want = (-(k as f64) * t).exp();
            assert!(
                (measured - want).abs() <= 2e-4,
                "decay k={k} t={t}: {measured} vs {want}"
            );
        }
    }
    // half-space geometric influence at a cell-edge boundary
    let halfplane_space =
        continuous::product_space(continuous::gaussian_model(256).unwrap(), 2).unwrap();
    let set = continuous::grid_set_from(
        &halfplane_space,
        |x| x[0] <= 0.0,
        Monotonicity::Decreasing,
    )
    .unwrap();
    let rep = continuous::geometric_influence_report(&halfplane_space, &set).unwrap();
    let gauss_density_at_zero = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    assert!(
        (rep.total - gauss_density_at_zero).abs() <= 1e-6,
        "half-space influence {} vs {}",
        rep.total,
        gauss_density_at_zero
    );
    // the four inequalities on random smooth functions
    let grids: Vec<_> = [(1usize, 257usize), (2, 65), (3, 33)]
        .iter()
        .map(|&(n, nodes)| {
            continuous::product_space(continuous::gaussian_model(nodes).unwrap(), n).unwrap()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    for i in 0..100 {
        let space = &grids[rng.gen_range(0..grids.len())];
        let degree = rng.gen_range(1..=4);
        let terms = rng.gen_range(1..=6);
        let f = continuous::random_polynomial(space, degree, terms, rng.gen()).unwrap();
        let t = rng.gen_range(0.05..1.0);
        for r in continuous::reverse_poincare_check(space, &f, t).unwrap() {
            assert!(r.pass(), "instance {i}: {} slack {}", r.check, r.slack);
        }
        let r = continuous::ledoux_l1_check(space, &f, t).unwrap();
        assert!(r.pass(), "instance {i}: {} slack {}", r.check, r.slack);
        let com = continuous::commutation_check(space, &f, t).unwrap();
        for r in com.strict {
            assert!(r.pass(), "instance {i}: {} slack {}", r.check, r.slack);
        }
        let rho = continuous::certified_line_lsi_floor(space.factor()).unwrap();
        let mut t_set: Vec<usize> = (0..space.n()).filter(|_| rng.gen_bool(0.5)).collect();
        if t_set.is_empty() {
            t_set.push(rng.gen_range(0..space.n()));
        }
        let r = continuous::chained_projection_check(space, rho, &f, t, &t_set).unwrap();
        assert!(r.pass(), "instance {i}: {} slack {}", r.check, r.slack);
    }
    c.finish();
}

#[test]
fn criterion_10_monotone_set_identity() {
    let c = Criterion::start(10, "enlargement boundary equals influence sum", 60);
    let space = continuous::product_space(continuous::gaussian_model(512).unwrap(), 2).unwrap();
    let halfspaces_axis1 = [-1.0, -0.3, 0.0, 0.5, 1.2];
    let halfspaces_axis2 = [-0.5, 0.4];
    let orthants = [-0.2, 0.0, 0.6];
    let mut sets = Vec::new();
    for &cval in &halfspaces_axis1 {
        sets.push(
            continuous::grid_set_from(&space, move |x| x[0] <= cval, Monotonicity::Decreasing)
                .unwrap(),
        );
    }
    for &cval in &halfspaces_axis2 {
        sets.push(
            continuous::grid_set_from(&space, move |x| x[1] <= cval, Monotonicity::Decreasing)
                .unwrap(),
        );
    }
    for &cval in &orthants {
        sets.push(
            continuous::grid_set_from(
                &space,
                move |x| x.iter().all(|&v| v <= cval),
                Monotonicity::Decreasing,
            )
            .unwrap(),
        );
    }
    assert_eq!(sets.len(), 10);
    for (i, set) in sets.iter().enumerate() {
        let rep = continuous::geometric_influence_report(&space, set).unwrap();
        let boundary = rep.boundary_uniform.expect("monotone sets carry a boundary");
        assert!(
            (rep.total - boundary).abs() <= 5e-4,
            "set {i}: influence sum {} vs boundary {}",
            rep.total,
            boundary
        );
    }
    c.finish();
}

#[test]
fn criterion_11_monotone_halfspace_extraction() {
    let c = Criterion::start(11, "half-space rounds back to a 1-coordinate set", 60);
    let space = continuous::product_space(continuous::gaussian_model(128).unwrap(), 2).unwrap();
    let set =
        continuous::grid_set_from(&space, |x| x[0] <= 0.2, Monotonicity::Decreasing).unwrap();
    let (found, cert) = continuous::monotone_set_junta(&space, &set, 0.1).unwrap();
    assert_eq!(cert.kept_set, vec![0], "kept {:?}", cert.kept_set);
    assert!(
        cert.measured_error <= 0.1,
        "symmetric difference {}",
        cert.measured_error
    );
    // the found set depends on coordinate 1 only: every fiber over it is flat
    let profile = continuous::geometric_influence_report(&space, &found).unwrap();
    assert!(profile.per_coordinate[1].abs() <= 1e-12);
    c.finish();
}

#[test]
fn criterion_12_sweep_determinism() {
    let c = Criterion::start(12, "repeated sweep is byte-identical", 60);
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_juntalab"))
            .args([
                "sweep",
                "--space",
                "cube:n=6",
                "--fn",
                "random",
                "--check",
                "hyper,bakry,lemma-la",
                "--seed",
                "7",
                "--grid",
                "t=0.1,0.2",
                "--grid",
                "seed=1..4",
            ])
            .output()
            .expect("sweep runs")
    };
    let first = run();
    let second = run();
    assert!(first.status.success(), "sweep failed: {first:?}");
    assert_eq!(first.status.code(), second.status.code());
    assert_eq!(first.stdout, second.stdout, "sweep reports differ between runs");
    assert!(!first.stdout.is_empty());
    c.finish();
}
