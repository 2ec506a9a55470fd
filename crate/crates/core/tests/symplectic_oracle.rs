use nalgebra::{Matrix4, SymmetricEigen};
use qkdnoise::gaussian_cv::{symplectic_eigs, TwoModeCM};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn omega() -> Matrix4<f64> {
    let mut w = Matrix4::zeros();
    w[(0, 1)] = 1.0;
    w[(1, 0)] = -1.0;
    w[(2, 3)] = 1.0;
    w[(3, 2)] = -1.0;
    w
}

fn rotation(mode: usize, theta: f64) -> Matrix4<f64> {
    let mut s = Matrix4::identity();
    let (c, n) = (theta.cos(), theta.sin());
    let k = 2 * mode;
    s[(k, k)] = c;
    s[(k, k + 1)] = n;
    s[(k + 1, k)] = -n;
    s[(k + 1, k + 1)] = c;
    s
}

fn squeezer(mode: usize, r: f64) -> Matrix4<f64> {
    let mut s = Matrix4::identity();
    s[(2 * mode, 2 * mode)] = r;
    s[(2 * mode + 1, 2 * mode + 1)] = 1.0 / r;
    s
}

fn beamsplitter(theta: f64) -> Matrix4<f64> {
    let (c, n) = (theta.cos(), theta.sin());
    let mut s = Matrix4::zeros();
    for q in 0..2 {
        s[(q, q)] = c;
        s[(q + 2, q + 2)] = c;
        s[(q, q + 2)] = n;
        s[(q + 2, q)] = -n;
    }
    s
}

fn random_physical(rng: &mut StdRng) -> (Matrix4<f64>, [f64; 2]) {
    let mut s = Matrix4::identity();
    for _ in 0..2 {
        s = rotation(0, rng.random_range(0.0..6.3)) * s;
        s = rotation(1, rng.random_range(0.0..6.3)) * s;
        s = squeezer(0, rng.random_range(0.5..2.0)) * s;
        s = squeezer(1, rng.random_range(0.5..2.0)) * s;
        s = beamsplitter(rng.random_range(0.0..6.3)) * s;
    }
    let nu = [rng.random_range(1.0..10.0), rng.random_range(1.0..10.0)];
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu[0], nu[0], nu[1], nu[1]));
    let g = s * d * s.transpose();
    ((g + g.transpose()) * 0.5, nu)
}

/// Symplectic eigenvalues from the spectrum of `-K^2`, `K = g^{1/2} Omega g^{1/2}`.
fn oracle(g: &Matrix4<f64>) -> [f64; 2] {
    let eig = SymmetricEigen::new(*g);
    let root = eig.eigenvectors * Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let k = root * omega() * root;
    let m = -(k * k);
    let mut ev: Vec<f64> = SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.iter().map(|v| v.sqrt()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    [(ev[0] + ev[1]) / 2.0, (ev[2] + ev[3]) / 2.0]
}

fn to_array(g: &Matrix4<f64>) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = g[(i, j)];
        }
    }
    m
}

#[test]
fn symplectic_eigs_match_spectral_oracle() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (g, _) = random_physical(&mut rng);
        let cm = TwoModeCM::from_array(to_array(&g)).unwrap();
        let (l1, l2) = symplectic_eigs(&cm).unwrap();
        let [o1, o2] = oracle(&g);
        worst = worst.max((l1 - o1).abs()).max((l2 - o2).abs());
    }
    assert!(worst < 1e-9, "worst deviation {worst:e}");
}

#[test]
fn oracle_recovers_williamson_spectrum() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..100 {
        let (g, nu) = random_physical(&mut rng);
        let [o1, o2] = oracle(&g);
        let (hi, lo) = if nu[0] >= nu[1] { (nu[0], nu[1]) } else { (nu[1], nu[0]) };
        assert!((o1 - hi).abs() < 1e-9 && (o2 - lo).abs() < 1e-9);
    }
}

#[test]
fn decoupled_matrices_agree_with_oracle() {
    // quadrature-decoupled matrices take the dedicated route
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..200 {
        let nu = [rng.random_range(1.0..10.0), rng.random_range(1.0..10.0)];
        let s = beamsplitter(rng.random_range(0.0..6.3)) * squeezer(0, rng.random_range(0.5..2.0)) * squeezer(1, rng.random_range(0.5..2.0));
        let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu[0], nu[0], nu[1], nu[1]));
        let g = s * d * s.transpose();
        let g = (g + g.transpose()) * 0.5;
        let cm = TwoModeCM::from_array(to_array(&g)).unwrap();
        assert!(cm.is_quadrature_decoupled());
        let (l1, l2) = symplectic_eigs(&cm).unwrap();
        let [o1, o2] = oracle(&g);
        assert!((l1 - o1).abs() < 1e-9 && (l2 - o2).abs() < 1e-9, "{l1} {l2} vs {o1} {o2}");
    }
}
