//! Dense linear algebra over a prime field 𝔽_p (p < 2³²).

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime `p ≡ 1 (mod m)` with `p > lower`.
pub fn prime_one_mod(m: u64, lower: u64) -> u64 {
    let mut p = (lower / m) * m + 1;
    if p <= lower {
        p += m;
    }
    while !is_prime(p) {
        p += m;
    }
    p
}

pub type Matrix = Vec<Vec<u64>>;

/// Row-reduces in place and returns the pivot columns.
pub fn rref(m: &mut Matrix, p: u64) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, pr);
        let inv = inv_mod(m[r][c], p);
        for x in m[r].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in c..cols {
                    let sub = mul_mod(f, m[r][j], p);
                    m[i][j] = (m[i][j] + p - sub) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

/// Basis of `{x : m·x = 0}`.
pub fn nullspace(m: &Matrix, cols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut a = m.clone();
    let pivots = rref(&mut a, p);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; cols];
            v[f] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - a[row][f]) % p;
            }
            v
        })
        .collect()
}

/// Characteristic polynomial `det(xI − a)`, coefficients from low to high
/// degree. Reduces to upper Hessenberg form first.
pub fn charpoly(a: &Matrix, p: u64) -> Vec<u64> {
    let n = a.len();
    let mut h = a.clone();
    for c in 0..n.saturating_sub(2) {
        let Some(piv) = (c + 1..n).find(|&i| h[i][c] != 0) else { continue };
        if piv != c + 1 {
            h.swap(piv, c + 1);
            for row in h.iter_mut() {
                row.swap(piv, c + 1);
            }
        }
        let inv = inv_mod(h[c + 1][c], p);
        for i in c + 2..n {
            if h[i][c] == 0 {
                continue;
            }
            let f = mul_mod(h[i][c], inv, p);
            // row_i -= f·row_{c+1}; then col_{c+1} += f·col_i to keep similarity
            for j in 0..n {
                let sub = mul_mod(f, h[c + 1][j], p);
                h[i][j] = (h[i][j] + p - sub) % p;
            }
            for row in h.iter_mut() {
                let add = mul_mod(f, row[i], p);
                row[c + 1] = (row[c + 1] + add) % p;
            }
        }
    }
    // polys[k] = charpoly of the leading k×k block
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for m in 1..=n {
        let hm = h[m - 1][m - 1];
        let prev = &polys[m - 1];
        let mut next = vec![0u64; m + 1];
        for (i, &c) in prev.iter().enumerate() {
            next[i + 1] = (next[i + 1] + c) % p;
            next[i] = (next[i] + p - mul_mod(hm, c, p)) % p;
        }
        let mut t = 1u64;
        for i in (1..m).rev() {
            t = mul_mod(t, h[i][i - 1], p);
            let coef = mul_mod(t, h[i - 1][m - 1], p);
            if coef == 0 {
                continue;
            }
            for (j, &c) in polys[i - 1].iter().enumerate() {
                next[j] = (next[j] + p - mul_mod(coef, c, p)) % p;
            }
        }
        polys.push(next);
    }
    polys.pop().unwrap()
}

pub fn eval_poly(poly: &[u64], x: u64, p: u64) -> u64 {
    poly.iter().rev().fold(0, |acc, &c| (mul_mod(acc, x, p) + c) % p)
}

/// Distinct roots in 𝔽_p by exhaustive evaluation.
pub fn roots(poly: &[u64], p: u64) -> Vec<u64> {
    (0..p).filter(|&x| eval_poly(poly, x, p) == 0).collect()
}

pub fn mat_vec(m: &Matrix, v: &[u64], p: u64) -> Vec<u64> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(0, |acc, (&a, &b)| (acc + mul_mod(a, b, p)) % p))
        .collect()
}
