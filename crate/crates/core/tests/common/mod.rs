//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

/// Row-major dense matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// `A ⊗ B`.
    pub fn kron(&self, other: &Dense) -> Dense {
        let n = self.n * other.n;
        let mut out = Dense::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..other.n {
                    for l in 0..other.n {
                        out.data[(i * other.n + k) * n + j * other.n + l] = a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, alpha: f64, other: &Dense) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }
}

pub fn sigma_x() -> Dense {
    Dense { n: 2, data: vec![0.0, 1.0, 1.0, 0.0] }
}

/// Bit value 0 is spin up (+1).
pub fn sigma_z() -> Dense {
    Dense { n: 2, data: vec![1.0, 0.0, 0.0, -1.0] }
}

/// Product of single-site operators; `ops[i]` acts on site `i`, and site 0
/// is the least significant bit of the basis index.
pub fn site_product(sites: usize, ops: &[(usize, Dense)]) -> Dense {
    let mut out = Dense::identity(1);
    for site in (0..sites).rev() {
        let factor = ops
            .iter()
            .find(|(s, _)| *s == site)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| Dense::identity(2));
        out = out.kron(&factor);
    }
    out
}

/// `H = −Σ_i (σx_i σx_{i+1} − κ σx_i σx_{i+2} + h σz_i)`, periodic, built
/// term by term from Kronecker products.
pub fn kron_tam(sites: usize, kappa: f64, h: f64) -> Dense {
    let dim = 1 << sites;
    let mut out = Dense::zeros(dim);
    for i in 0..sites {
        let nn = site_product(sites, &[(i, sigma_x()), ((i + 1) % sites, sigma_x())]);
        let nnn = site_product(sites, &[(i, sigma_x()), ((i + 2) % sites, sigma_x())]);
        let z = site_product(sites, &[(i, sigma_z())]);
        out.add_scaled(-1.0, &nn);
        out.add_scaled(kappa, &nnn);
        out.add_scaled(-h, &z);
    }
    out
}

pub fn kron_sigma_z_total(sites: usize) -> Dense {
    let mut out = Dense::zeros(1 << sites);
    for i in 0..sites {
        out.add_scaled(1.0, &site_product(sites, &[(i, sigma_z())]));
    }
    out
}

/// Cyclic Jacobi rotations. Returns ascending eigenvalues and the matching
/// eigenvectors as columns (`vectors[k]` is the k-th eigenvector).
pub fn jacobi_eigen(m: &Dense) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = Dense::identity(n).data;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|x, y| a[x * n + x].total_cmp(&a[y * n + y]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    (values, vectors)
}

/// Adaptive Gauss–Kronrod (7, 15). Nodes are interior, so integrable
/// endpoint singularities are fine.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        const XK: [f64; 8] = [
            0.991455371120812639206854697526329,
            0.949107912342758524526189684047851,
            0.864864423359769072789712788640926,
            0.741531185599394439863864773280788,
            0.586087235467691130294144845693013,
            0.405845151377397166906606412076961,
            0.207784955007898467600689403773245,
            0.000000000000000000000000000000000,
        ];
        const WK: [f64; 8] = [
            0.022935322010529224963732008058970,
            0.063092092629978553290700663189204,
            0.104790010322250183839876322541518,
            0.140653259715525918745189590510238,
            0.169004726639267902826583426598550,
            0.190350578064785409913256402421014,
            0.204432940075298892414161999234649,
            0.209482141084727828012999174891714,
        ];
        const WG: [f64; 4] = [
            0.129484966168869693270611432679082,
            0.279705391489276667901467771423780,
            0.381830050505118944950369775488975,
            0.417959183673469387755102040816327,
        ];
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WK[7] * fc;
        let mut g = WG[3] * fc;
        for i in 0..7 {
            let x = h * XK[i];
            let s = f(c - x) + f(c + x);
            k += WK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        (k * h, ((k - g) * h).abs())
    }
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let (k, err) = gk15(f, a, b);
        if err <= tol || depth == 0 || (b - a) < 1e-15 * (1.0 + a.abs()) {
            return k;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(f, a, b, tol, 40)
}

// x = lo + (hi − lo)(1 − cos θ)/2 absorbs the endpoint peaks, so the adaptive rule
// never has to resolve a singularity.
pub fn integrate_between(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    adaptive_integrate(
        &|t: f64| {
            let x = lo + half * (1.0 - t.cos());
            let y = g(x);
            // the +∞ peak sentinel marks a null set
            if !y.is_finite() {
                return 0.0;
            }
            y * half * t.sin()
        },
        0.0,
        std::f64::consts::PI,
        1e-10,
    )
}

/// SplitMix64, an RNG unrelated to the library's generator.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub fn ks_against<F: Fn(f64) -> f64>(mut samples: Vec<f64>, cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let c = cdf(*x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}
