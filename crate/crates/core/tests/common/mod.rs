#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfbackhaul::algorithms::static_clustering;
use selfbackhaul::linalg::{cn_unit, C64};
use selfbackhaul::topology::{realize, AccessChannels};
use selfbackhaul::{BeamformerSet, ChannelSet, Clustering, DecodingOrder, Dims, NetworkConfig, PowerBudget, Problem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn desk_channels(seed: u64) -> (NetworkConfig, ChannelSet) {
    let cfg = NetworkConfig::desk_scale();
    let (_, ch) = realize(&cfg, &mut rng(seed)).unwrap();
    (cfg, ch)
}

/// Desk-scale problem with static cluster size `c`.
pub fn desk_problem(seed: u64, c: usize) -> Problem {
    let (cfg, ch) = desk_channels(seed);
    let cl = static_clustering(&ch.large_scale, c).unwrap();
    Problem::full_csi(ch, cl, cfg.weights.clone(), cfg.power_budget()).unwrap()
}

/// Random clustering with every user served by at least one SBS.
pub fn random_clustering<R: Rng>(users: usize, sbs: usize, rng: &mut R) -> Clustering {
    let mut m: Vec<Vec<bool>> = (0..users).map(|_| (0..sbs).map(|_| rng.random_bool(0.5)).collect()).collect();
    for row in &mut m {
        if !row.iter().any(|&b| b) {
            row[rng.random_range(0..sbs)] = true;
        }
    }
    Clustering::from_matrix(m)
}

/// Feasible point with each BS at a random fraction of its budget.
pub fn random_feasible<R: Rng>(p: &Problem, rng: &mut R) -> BeamformerSet {
    let f = rng.random_range(0.05..1.0);
    BeamformerSet::random_interior(p.dims(), &p.clustering, &p.budget, f, rng)
}

/// Small random instance with unit-scale channels and noise, so every term
/// of the rate expressions is of order one.
pub fn toy_problem(seed: u64, users: usize, sbs: usize, l: usize, m: usize) -> Problem {
    let mut r = rng(seed);
    let mut cfg = NetworkConfig::desk_scale();
    cfg.n_sbs = sbs;
    cfg.n_users_scheduled = users;
    cfg.sbs_tx_antennas = l;
    cfg.mbs_antennas = m;
    cfg.weights = (0..users).map(|_| r.random_range(0.5..1.5)).collect();
    let (_, mut ch) = realize(&cfg, &mut r).unwrap();
    let v = |r: &mut ChaCha8Rng, n: usize| (0..n).map(|_| cn_unit(r)).collect::<Vec<C64>>();
    for k in 0..users {
        ch.h_user_mbs[k] = v(&mut r, m);
        for n in 0..sbs {
            ch.h_user_sbs[k][n] = v(&mut r, l);
        }
    }
    for n in 0..sbs {
        ch.h_sbs_mbs[n] = v(&mut r, m);
        for j in 0..sbs {
            if j != n {
                ch.h_sbs_sbs[n][j] = v(&mut r, l);
            }
        }
    }
    ch.noise_user = (0..users).map(|_| r.random_range(0.1..1.0)).collect();
    ch.noise_sbs = (0..sbs).map(|_| r.random_range(0.1..1.0)).collect();
    ch.si_gain = 0.05;
    let cl = random_clustering(users, sbs, &mut r);
    let budget = PowerBudget { mbs: r.random_range(1.0..4.0), sbs: (0..sbs).map(|_| r.random_range(0.5..2.0)).collect() };
    Problem::full_csi(ch, cl, cfg.weights, budget).unwrap()
}

// ---------------------------------------------------------------------------
// Stream-by-stream oracle. Every receiver sees 2K streams (the access symbol
// x^A_i and the backhaul symbol x^B_i of each user); the rate of a stream is
// log2(1 + |coefficient|^2 / (sum of |coefficients| of the other streams it
// cannot cancel + extra power + noise)).

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn rate(sig: C64, others: f64, noise: f64) -> f64 {
    (1.0 + sig.norm_sqr() / (others + noise)).log2()
}

/// Access rate of user k with the SBS-user channels replaced by `h`.
pub fn oracle_access(ch: &ChannelSet, h: &AccessChannels, cl: &Clustering, x: &BeamformerSet, k: usize) -> f64 {
    if cl.cluster_of(k).is_empty() {
        return 0.0;
    }
    let users = ch.dims.users;
    let access_coef = |i: usize| -> C64 {
        let mut c = C64::new(0.0, 0.0);
        for n in 0..ch.dims.sbs {
            if cl.serves(i, n) {
                c += dot(&h[k][n], x.w(i, n));
            }
        }
        c
    };
    let mut others = 0.0;
    for i in 0..users {
        others += dot(&ch.h_user_mbs[k], x.v(i)).norm_sqr();
        if i != k {
            others += access_coef(i).norm_sqr();
        }
    }
    rate(access_coef(k), others, ch.noise_user[k])
}

/// Backhaul rate of user k at serving SBS n. SBS n knows the access symbols
/// of the users it serves (cancelled, leaving only residual SI) and has
/// already decoded the backhaul symbols of served users stronger than k.
pub fn oracle_backhaul(ch: &ChannelSet, cl: &Clustering, ord: &DecodingOrder, x: &BeamformerSet, k: usize, n: usize) -> f64 {
    let users = ch.dims.users;
    let mut others = 0.0;
    for i in 0..users {
        let decoded_first = cl.serves(i, n) && ord.h_aggregate[i] > ord.h_aggregate[k];
        if i != k && !decoded_first {
            others += dot(&ch.h_sbs_mbs[n], x.v(i)).norm_sqr();
        }
        if cl.serves(i, n) {
            others += ch.si_gain * x.w(i, n).iter().map(|z| z.norm_sqr()).sum::<f64>();
        } else {
            let mut c = C64::new(0.0, 0.0);
            for j in 0..ch.dims.sbs {
                if cl.serves(i, j) && j != n {
                    c += dot(&ch.h_sbs_sbs[n][j], x.w(i, j));
                }
            }
            others += c.norm_sqr();
        }
    }
    rate(dot(&ch.h_sbs_mbs[n], x.v(k)), others, ch.noise_sbs[n])
}

/// `sum_k w_k min(R^A_k, min_n R^B_{k,n})`
pub fn oracle_objective(p: &Problem, x: &BeamformerSet) -> f64 {
    let ch = &p.channels;
    (0..ch.dims.users)
        .filter(|&k| !p.clustering.cluster_of(k).is_empty())
        .map(|k| {
            let a = oracle_access(ch, &ch.h_user_sbs, &p.clustering, x, k);
            let b = p
                .clustering
                .cluster_of(k)
                .iter()
                .map(|&n| oracle_backhaul(ch, &p.clustering, &p.order, x, k, n))
                .fold(f64::INFINITY, f64::min);
            p.weights[k] * a.min(b)
        })
        .sum()
}

pub fn random_direction<R: Rng>(x: &BeamformerSet, cl: &Clustering, rng: &mut R) -> BeamformerSet {
    let mut d = BeamformerSet::zeros(x.dims());
    for z in d.as_mut_slice() {
        *z = cn_unit(rng);
    }
    d.apply_zero_pattern(cl);
    let n = d.norm();
    d.as_mut_slice().iter_mut().for_each(|z| *z /= n);
    d
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Minimizes `||y - x||^2` over `||y||^2 <= p` for one block by bisection on
/// the multiplier of the stationarity condition `y = x / (1 + lambda)`.
pub fn ball_oracle(x: &[C64], p: f64) -> Vec<C64> {
    let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    if nx <= p {
        return x.to_vec();
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while nx / (1.0 + hi).powi(2) > p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if nx / (1.0 + mid).powi(2) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = 0.5 * (lo + hi);
    x.iter().map(|z| z / (1.0 + lam)).collect()
}

pub fn projection_oracle(x: &BeamformerSet, cl: &Clustering, budget: &PowerBudget) -> BeamformerSet {
    let d = x.dims();
    let mut out = BeamformerSet::zeros(d);
    for n in 0..d.sbs {
        let block: Vec<C64> = (0..d.users)
            .flat_map(|k| if cl.serves(k, n) { x.w(k, n).to_vec() } else { vec![C64::new(0.0, 0.0); d.sbs_antennas] })
            .collect();
        let y = ball_oracle(&block, budget.sbs[n]);
        for k in 0..d.users {
            let l = d.sbs_antennas;
            out.w_mut(k, n).copy_from_slice(&y[k * l..(k + 1) * l]);
        }
    }
    let block: Vec<C64> = (0..d.users)
        .flat_map(|k| if cl.cluster_of(k).is_empty() { vec![C64::new(0.0, 0.0); d.mbs_antennas] } else { x.v(k).to_vec() })
        .collect();
    let y = ball_oracle(&block, budget.mbs);
    for k in 0..d.users {
        let m = d.mbs_antennas;
        out.v_mut(k).copy_from_slice(&y[k * m..(k + 1) * m]);
    }
    out
}

pub fn random_projection_input(seed: u64) -> (BeamformerSet, Clustering, PowerBudget) {
    let mut r = rng(seed);
    let d = Dims { users: r.random_range(1..4), sbs: r.random_range(1..5), sbs_antennas: r.random_range(1..4), mbs_antennas: r.random_range(1..6) };
    let mut m: Vec<Vec<bool>> = (0..d.users).map(|_| (0..d.sbs).map(|_| r.random_bool(0.6)).collect()).collect();
    if r.random_bool(0.8) {
        m[0][0] = true;
    }
    let cl = Clustering::from_matrix(m);
    let budget = PowerBudget { mbs: r.random_range(0.1..10.0), sbs: (0..d.sbs).map(|_| r.random_range(0.01..3.0)).collect() };
    let scale = r.random_range(0.1..5.0);
    let mut x = BeamformerSet::zeros(d);
    for z in x.as_mut_slice() {
        *z = cn_unit(&mut r) * scale;
    }
    (x, cl, budget)
}

/// Best end-to-end rate of a one-user, one-SBS, single-antenna instance. The
/// rate depends only on s = |w|^2 and t = |v|^2:
/// access |h|^2 s / (|h_M|^2 t + noise), backhaul |g|^2 t / (si s + noise).
pub fn single_link_grid(p: &Problem) -> f64 {
    let ch = &p.channels;
    let (h, hm, g) = (ch.h_user_sbs[0][0][0].norm_sqr(), ch.h_user_mbs[0][0].norm_sqr(), ch.h_sbs_mbs[0][0].norm_sqr());
    let rate = |s: f64, t: f64| {
        let a = (1.0 + h * s / (hm * t + ch.noise_user[0])).log2();
        let b = (1.0 + g * t / (ch.si_gain * s + ch.noise_sbs[0])).log2();
        a.min(b)
    };
    let (ps, pm) = (p.budget.sbs[0], p.budget.mbs);
    let n = 400;
    let mut best = 0.0f64;
    for i in 0..=n {
        for j in 0..=n {
            best = best.max(rate(ps * i as f64 / n as f64, pm * j as f64 / n as f64));
        }
    }
    best
}

/// Central finite-difference gradient over every real coordinate.
pub fn fd_gradient(f: &dyn Fn(&BeamformerSet) -> f64, x: &BeamformerSet, h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * x.as_slice().len());
    for i in 0..x.as_slice().len() {
        for e in [C64::new(h, 0.0), C64::new(0.0, h)] {
            let mut a = x.clone();
            let mut b = x.clone();
            a.as_mut_slice()[i] += e;
            b.as_mut_slice()[i] -= e;
            out.push((f(&a) - f(&b)) / (2.0 * h));
        }
    }
    out
}

pub fn flatten(g: &BeamformerSet) -> Vec<f64> {
    g.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}
