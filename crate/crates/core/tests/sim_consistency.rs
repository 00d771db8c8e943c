use shocklab::rng::{stream, Purpose};
use shocklab::sim::{
    evolve_coupled_with, evolve_with, height_passage, init_bernoulli_with, second_class_passage, BernoulliInit,
    Configuration, CoupledPair, Window, ZeroSite,
};

fn two_sample_ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn critical(n: u64) -> f64 {
    // alpha = 1e-3
    1.95 * (2.0 / n as f64).sqrt()
}

fn shock_config(seed: u64, radius: i64, forced_empty: bool) -> Configuration {
    let mut p = BernoulliInit::new(0.3, 0.7, 5.0);
    if forced_empty {
        p.zero_site = ZeroSite::ForcedEmpty;
    }
    let mut rng = stream(seed, 0, Purpose::Initial);
    init_bernoulli_with(&p, Window::symmetric(radius), &mut rng).unwrap().config
}

#[test]
fn passage_height_matches_event_driven() {
    let n = 4000;
    let t = 6.0;
    let mut ev = Vec::new();
    let mut lp = Vec::new();
    for r in 0..n {
        let c = shock_config(r, 40, false);
        let mut rng = stream(11, r, Purpose::Dynamics);
        ev.push(evolve_with(&c, t, &mut rng).unwrap().height(2).unwrap() as f64);
        let c = shock_config(r + n, 40, false);
        let mut rng = stream(12, r, Purpose::Dynamics);
        lp.push(height_passage(&c, t, 2, &mut rng).unwrap() as f64);
    }
    let d = two_sample_ks(ev, lp);
    assert!(d < critical(n), "ks {d}");
}

#[test]
fn passage_second_class_matches_coupling() {
    let n = 4000;
    let t = 6.0;
    let mut ev = Vec::new();
    let mut lp = Vec::new();
    for r in 0..n {
        let c = shock_config(r, 40, true);
        let pair = CoupledPair::with_extra_particle(c, 0).unwrap();
        let mut rng = stream(21, r, Purpose::Dynamics);
        ev.push(evolve_coupled_with(&pair, t, &mut rng).unwrap().discrepancy as f64);
        let c = shock_config(r + n, 40, true);
        let mut rng = stream(22, r, Purpose::Dynamics);
        lp.push(second_class_passage(&c, t, &mut rng).unwrap() as f64);
    }
    let d = two_sample_ks(ev, lp);
    assert!(d < critical(n), "ks {d}");
}

#[test]
fn passage_heights_agree_pathwise_with_final_positions() {
    // the height from counts equals the height from the evolved occupation
    let c = shock_config(3, 30, false);
    for r in 0..200 {
        let mut a = stream(5, r, Purpose::Dynamics);
        let xs = shocklab::sim::evolve_passage(&c, 4.0, &mut a).unwrap();
        let e = Configuration::from_positions(c.window(), &xs).unwrap();
        let b0 = c.positions().iter().filter(|&&x| x >= 1).count() as i64;
        let b1 = xs.iter().filter(|&&x| x >= 1).count() as i64;
        for z in -5..=5 {
            let n = xs.iter().filter(|&&x| x > z).count() as i64;
            // occupation-based height with J = b1 - b0
            let mut h = 2 * (b1 - b0);
            if z >= 0 {
                h += (1..=z).map(|y| 1 - 2 * e.eta(y) as i64).sum::<i64>();
            } else {
                h -= ((z + 1)..=0).map(|y| 1 - 2 * e.eta(y) as i64).sum::<i64>();
            }
            assert_eq!(h, z + 2 * (n - b0));
        }
    }
}

// Leader-based infinite-lattice samplers against walled finite windows.

fn walled_sample(seed: u64, t: f64, forced_empty: bool) -> shocklab::sim::InitialSample {
    let mut p = BernoulliInit::new(0.3, 0.7, t);
    if forced_empty {
        p.zero_site = ZeroSite::ForcedEmpty;
    }
    let radius = shocklab::sim::required_radius(t, 1.0);
    let mut rng = stream(seed, 0, Purpose::Initial);
    init_bernoulli_with(&p, Window::symmetric(radius), &mut rng).unwrap()
}

#[test]
fn leader_height_matches_walled_window() {
    use shocklab::harness::shock_replica;
    use shocklab::scaling::ScalingFrame;
    let n = 4000;
    let t = 30.0;
    let frame = ScalingFrame::at_time(0.3, 0.7, t).unwrap();
    let (mut lead, mut wall) = (Vec::new(), Vec::new());
    for r in 0..n {
        let mut a = stream(31, r, Purpose::Initial);
        let mut b = stream(31, r, Purpose::Dynamics);
        lead.push(shock_replica(&frame, &mut a, &mut b).unwrap().height_shock as f64);
        let s = walled_sample(32 + r, t, false);
        let z = frame.shock_site(s.n_right, s.n_left);
        let mut rng = stream(33, r, Purpose::Dynamics);
        wall.push(height_passage(&s.config, t, z, &mut rng).unwrap() as f64);
    }
    let d = two_sample_ks(lead, wall);
    assert!(d < critical(n), "ks {d}");
}

#[test]
fn leader_second_class_matches_walled_window() {
    use shocklab::harness::second_class_replica;
    use shocklab::scaling::ScalingFrame;
    let n = 4000;
    let t = 30.0;
    let frame = ScalingFrame::at_time(0.3, 0.7, t).unwrap();
    let (mut lead, mut wall) = (Vec::new(), Vec::new());
    for r in 0..n {
        let mut a = stream(41, r, Purpose::Initial);
        let mut b = stream(41, r, Purpose::Dynamics);
        let s = second_class_replica(&frame, &mut a, &mut b).unwrap();
        lead.push(s.position as f64 + frame.shock_offset(s.n_right, s.n_left));
        let w = walled_sample(42 + r, t, true);
        let mut rng = stream(43, r, Purpose::Dynamics);
        let x = second_class_passage(&w.config, t, &mut rng).unwrap();
        wall.push(x as f64 + frame.shock_offset(w.n_right, w.n_left));
    }
    let d = two_sample_ks(lead, wall);
    assert!(d < critical(n), "ks {d}");
}

#[test]
fn leader_stationary_matches_walled_window() {
    use rand::Rng;
    use shocklab::harness::{stationary_replica, StationaryTarget};
    let n = 4000;
    let t = 30.0;
    let target = StationaryTarget { rho: 0.5, t, n: 8 };
    let radius = shocklab::sim::required_radius(t, 1.0);
    let window = Window::symmetric(radius);
    let (mut lead, mut wall) = (Vec::new(), Vec::new());
    for r in 0..n {
        let mut a = stream(51, r, Purpose::Initial);
        let mut b = stream(51, r, Purpose::Dynamics);
        lead.push(stationary_replica(&target, &mut a, &mut b).unwrap() as f64);
        let mut init = stream(52, r, Purpose::Initial);
        let eta: Vec<u8> = (0..window.len()).map(|_| init.gen_bool(0.5) as u8).collect();
        let c = Configuration::from_occupation(window, eta).unwrap();
        let mut rng = stream(53, r, Purpose::Dynamics);
        let xs = shocklab::sim::evolve_passage(&c, t, &mut rng).unwrap();
        let first_left = c.positions().iter().position(|&x| x < 0).unwrap();
        wall.push(xs[first_left + 7] as f64);
    }
    let d = two_sample_ks(lead, wall);
    assert!(d < critical(n), "ks {d}");
}
