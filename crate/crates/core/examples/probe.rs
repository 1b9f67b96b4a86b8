use barybo::acquisition::{lcb, optimize_acquisition, OptimizeMode};
use barybo::benchmarks::{lhs_sample, make_mf_problem, MultiFidelityProblem};
use barybo::gp::{fit_gp, Dataset, GpModel};
use barybo::kernels::KernelKind;
use barybo::tasks::weights_fidelity;
use barybo::wasserstein::{barycenter_gaussian1d, w2_gaussian1d, WeightVector};
use std::io::Write;

#[derive(Clone, Copy, Debug)]
enum Variant {
    RatioMax,          // argmax over (m,x) of num / (c (w2^2 + 1))
    TwoStepAgree,      // x* = argmin lcb(bary); m* = argmin c (1 + w2^2)
    TwoStepDisagree,   // x* = argmin lcb(bary); m* = argmax w2^2 / c
}

fn usage(variant: Variant, shared_design: bool, costs: &[f64], seed: u64) -> (f64, usize) {
    let mf: MultiFidelityProblem = make_mf_problem("forrester", 1).unwrap();
    let m_count = mf.source_count();
    let lambda: WeightVector = weights_fidelity(&mf.fidelities).unwrap();
    let n0 = 2usize;
    let budget = 30usize;
    let cap = 3 * budget;
    let beta = 2.0;

    let mut datasets: Vec<Dataset> = (0..m_count)
        .map(|m| {
            let dseed = if shared_design { seed } else { seed.wrapping_add(1 + m as u64) };
            let design = lhs_sample(n0, 1, dseed);
            let vals: Vec<f64> = design.iter().map(|u| mf.eval_source_unit(m, u)).collect();
            Dataset::new(design, vals).unwrap()
        })
        .collect();
    let mut models: Vec<GpModel> = datasets
        .iter()
        .map(|d| fit_gp(d.clone(), KernelKind::SquaredExponential, 1e-6).unwrap())
        .collect();
    let mut gt_best = datasets[0].raw_values().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut gt = n0;
    let mut total = n0 * m_count;
    let mut gt_chosen = 0usize;
    let mut chosen = 0usize;
    let mut t = 0u64;
    while gt < budget && total < cap {
        t += 1;
        let (m_star, x_star) = match variant {
            Variant::RatioMax => {
                let mut best: Option<(usize, Vec<f64>, f64)> = None;
                for m in 0..m_count {
                    let sc = |x: &[f64]| {
                        let gs: Vec<_> = models.iter().map(|mm| mm.predict(x)).collect();
                        let bary = barycenter_gaussian1d(&gs, &lambda).unwrap();
                        let w2 = w2_gaussian1d(gs[m], bary);
                        (gt_best - lcb(bary, beta)) / (costs[m] * (w2 * w2 + 1.0))
                    };
                    let x = optimize_acquisition(&sc, 1, OptimizeMode::Maximize, 500, seed ^ (t * 1315423911));
                    let v = sc(&x);
                    if best.as_ref().map_or(true, |(_, _, bv)| v > *bv) {
                        best = Some((m, x, v));
                    }
                }
                let (m, x, _) = best.unwrap();
                (m, x)
            }
            Variant::TwoStepAgree | Variant::TwoStepDisagree => {
                let sc = |x: &[f64]| {
                    let gs: Vec<_> = models.iter().map(|mm| mm.predict(x)).collect();
                    lcb(barycenter_gaussian1d(&gs, &lambda).unwrap(), beta)
                };
                let x = optimize_acquisition(&sc, 1, OptimizeMode::Minimize, 500, seed ^ (t * 1315423911));
                let gs: Vec<_> = models.iter().map(|mm| mm.predict(&x)).collect();
                let bary = barycenter_gaussian1d(&gs, &lambda).unwrap();
                let mut m_star = 0;
                let mut best = match variant { Variant::TwoStepAgree => f64::INFINITY, _ => f64::NEG_INFINITY };
                for m in 0..m_count {
                    let w2 = w2_gaussian1d(gs[m], bary);
                    match variant {
                        Variant::TwoStepAgree => {
                            let v = costs[m] * (1.0 + w2 * w2);
                            if v < best { best = v; m_star = m; }
                        }
                        _ => {
                            let v = w2 * w2 / costs[m];
                            if v > best { best = v; m_star = m; }
                        }
                    }
                }
                (m_star, x)
            }
        };
        let y = mf.eval_source_unit(m_star, &x_star);
        datasets[m_star] = datasets[m_star].with_observation(x_star, y).unwrap();
        models[m_star] = fit_gp(datasets[m_star].clone(), KernelKind::SquaredExponential, 1e-6).unwrap();
        chosen += 1;
        if m_star == 0 { gt += 1; gt_chosen += 1; gt_best = gt_best.min(y); }
        total += 1;
    }
    let _ = (gt_chosen, chosen);
    (100.0 * (n0 + gt_chosen) as f64 / total as f64, total)
}

fn main() {
    let uniform = vec![1.0; 4];
    let fid = vec![1.0, 0.75, 0.5, 0.25];
    for (label, v, shared, costs) in [
        ("ratio  shared  c=1", Variant::RatioMax, true, &uniform),
        ("ratio  own     c=1", Variant::RatioMax, false, &uniform),
        ("agree  own     c=1", Variant::TwoStepAgree, false, &uniform),
        ("agree  own     c=f", Variant::TwoStepAgree, false, &fid),
        ("disagr own     c=1", Variant::TwoStepDisagree, false, &uniform),
        ("disagr own     c=f", Variant::TwoStepDisagree, false, &fid),
        ("disagr shared  c=1", Variant::TwoStepDisagree, true, &uniform),
    ] {
        print!("{label}:");
        std::io::stdout().flush().unwrap();
        for r in 0..5 {
            let (u, total) = usage(v, shared, costs, 9200 + r);
            print!(" {u:.0}%({total})");
            std::io::stdout().flush().unwrap();
        }
        println!();
    }
}
