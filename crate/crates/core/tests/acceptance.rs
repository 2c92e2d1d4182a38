//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::time::{Duration, Instant};

use ostail::asymptotics::{approx, breiman_tail, scaled_tail_model_a, scaled_tail_model_b};
use ostail::dependence::eta;
use ostail::montecarlo::diagnostics::{sum_form_check, tail_curve};
use ostail::montecarlo::{conditional_c1, crude, sample_lc_parallel, McConfig, Method};
use ostail::oracles::{grid_max_min, ratio_limit, scale_mixture_tail};
use ostail::riskmeasures::empirical_tail;
use ostail::{Dependence, GeometricGrid, MarginalModel, RatioTrend, Scenario, WeightModel, WeightVectorSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn scenario(ms: Vec<MarginalModel>, w: Vec<WeightModel>) -> Scenario {
    Scenario::new(ms, Dependence::Independent, WeightVectorSpec::independent(w).unwrap()).unwrap()
}

fn frechet_scenario() -> Scenario {
    scenario(vec![MarginalModel::pareto(2.0, 1.0).unwrap(); 3], vec![WeightModel::uniform(1.0).unwrap(); 3])
}

fn scenario_path(name: &str) -> String {
    format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn cli(args: &[&str]) -> (i32, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = ostail::cli::run(std::iter::once("ostail").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap() + &String::from_utf8(err).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn breiman_exactness() -> Outcome {
    let m = MarginalModel::pareto(2.0, 1.0).unwrap();
    let u = WeightModel::uniform(1.0).unwrap();
    let worst = (0..50)
        .map(|i| 10f64.powf(8.0 * i as f64 / 49.0))
        .map(|t| rel(breiman_tail(&u, &m, t).unwrap(), scale_mixture_tail(&u, &m, t).unwrap()))
        .fold(0.0, f64::max);
    Outcome { pass: worst < 1e-10, detail: format!("max relative error {worst:.2e} over 50 points") }
}

fn trend_detail(tr: &RatioTrend) -> String {
    let r: Vec<String> = tr.ratios.iter().map(|r| format!("{r:.4}")).collect();
    format!("ratios [{}], monotone={}, improves={}", r.join(", "), tr.monotone, tr.improves)
}

fn frechet_main() -> Outcome {
    let s = frechet_scenario();
    let t = 100.0;
    let a = approx(&s, t).unwrap().value;
    let mc = McConfig::new(1_000_000, 42);
    let e = conditional_c1(&s, t, &mc).unwrap();
    let ratio = e.point / a;
    let grid = GeometricGrid::new(10f64.powf(1.5), 100.0, 4).unwrap().values();
    let rows = tail_curve(&s, &grid, Method::ConditionalC1, &mc).unwrap();
    let est: Vec<f64> = rows.iter().map(|r| r.estimate.point).collect();
    let apx: Vec<f64> = rows.iter().map(|r| r.approx.as_ref().map_or(f64::NAN, |a| a.value)).collect();
    let tr = RatioTrend::from_values(&grid, &est, &apx).unwrap();
    Outcome {
        pass: (0.85..=1.15).contains(&ratio) && tr.monotone && tr.improves,
        detail: format!("approx {a:.4e}, estimate {:.4e} (se {:.1e}), ratio {ratio:.4}; curve {}", e.point, e.stderr, trend_detail(&tr)),
    }
}

fn sum_form() -> Outcome {
    let r = sum_form_check(&frechet_scenario(), 100.0, &McConfig::new(1_000_000, 42)).unwrap();
    Outcome {
        pass: (0.85..=1.15).contains(&r.ratio) && r.shares[0] >= 0.9,
        detail: format!("sum/L ratio {:.4} (CI {:.4}..{:.4}), first-term share {:.4}", r.ratio, r.ratio_ci.0, r.ratio_ci.1, r.shares[0]),
    }
}

fn model_a() -> Outcome {
    let ln = MarginalModel::lognormal(0.0, 1.0).unwrap();
    let w = WeightModel::model_a(1.0, 0.5, 0.5).unwrap();
    let s = ln.tail_quantile(1e-8).unwrap();
    let ratio = scale_mixture_tail(&w, &ln, s).unwrap() / scaled_tail_model_a(&w, &ln, s).unwrap();
    let grid: Vec<f64> = [1e-4, 1e-6, 1e-8, 1e-10, 1e-12].iter().map(|&q| ln.tail_quantile(q).unwrap()).collect();
    let tr = ratio_limit(|s| scale_mixture_tail(&w, &ln, s).unwrap(), |s| scaled_tail_model_a(&w, &ln, s).unwrap(), &grid).unwrap();
    Outcome { pass: (0.95..=1.05).contains(&ratio) && tr.monotone && tr.improves, detail: format!("ratio at tail 1e-8: {ratio:.5}; {}", trend_detail(&tr)) }
}

fn model_b() -> Outcome {
    let e = MarginalModel::exponential(1.0).unwrap();
    let u = WeightModel::uniform(1.0).unwrap();
    let t = 40.0;
    let ra = scale_mixture_tail(&u, &e, t).unwrap() / ((-t as f64).exp() / t);
    let ln = MarginalModel::lognormal(0.0, 1.0).unwrap();
    let b = WeightModel::beta(2.0, 3.0, 1.0).unwrap();
    let s = ln.tail_quantile(1e-10).unwrap();
    let rb = scale_mixture_tail(&b, &ln, s).unwrap() / scaled_tail_model_b(&b, &ln, s).unwrap();
    let grid: Vec<f64> = [1e-4, 1e-6, 1e-8, 1e-10].iter().map(|&q| ln.tail_quantile(q).unwrap()).collect();
    let tr = ratio_limit(|s| scale_mixture_tail(&b, &ln, s).unwrap(), |s| scaled_tail_model_b(&b, &ln, s).unwrap(), &grid).unwrap();
    let pass_a = (ra - 1.0).abs() <= 0.05;
    let pass_b = (rb - 1.0).abs() <= 0.10 && tr.monotone && tr.improves;
    Outcome {
        pass: pass_a && pass_b,
        detail: format!(
            "(a) Uniform x Exponential at t=40: ratio {ra:.5} [{}]; (b) Beta(2,3) x LogNormal at tail 1e-10: ratio {rb:.5} [{}], {}",
            if pass_a { "ok" } else { "out of 5%" },
            if pass_b { "ok" } else { "out of 10%" },
            trend_detail(&tr)
        ),
    }
}

fn eta_constant() -> Outcome {
    let rhos: Vec<f64> = (0..50).map(|i| -0.99 + 1.98 * (i as f64 + 0.5) / 50.0).collect();
    let vals: Vec<f64> = rhos.iter().map(|&r| eta(r).unwrap()).collect();
    let worst = rhos.iter().zip(&vals).map(|(&r, v)| (v - grid_max_min(r).unwrap()).abs()).fold(0.0, f64::max);
    let e0 = eta(0.0).unwrap();
    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    let below_one = vals.iter().all(|&v| v < 1.0);
    Outcome {
        pass: worst < 1e-6 && (e0 - 0.707_106_8).abs() < 1e-6 && increasing && below_one,
        detail: format!("max |eta - grid| {worst:.2e}, eta(0) = {e0:.9}, increasing={increasing}, all<1={below_one}"),
    }
}

fn bonferroni() -> Outcome {
    let ms = vec![MarginalModel::pareto(2.0, 2.0).unwrap(), MarginalModel::pareto(2.0, 1.5).unwrap(), MarginalModel::pareto(2.0, 1.0).unwrap()];
    let w = vec![WeightModel::degenerate(1.0).unwrap(), WeightModel::degenerate(0.0).unwrap(), WeightModel::degenerate(0.0).unwrap()];
    let s = scenario(ms.clone(), w);
    let one = WeightModel::degenerate(1.0).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [3.0, 5.0, 10.0, 20.0, 50.0] {
        let tails: Vec<f64> = ms.iter().map(|m| scale_mixture_tail(&one, m, t).unwrap()).collect();
        let upper: f64 = tails.iter().sum();
        let lower = upper - (tails[0] * tails[1] + tails[0] * tails[2] + tails[1] * tails[2]);
        let e = crude(&s, t, &McConfig::new(1_000_000, 7)).unwrap();
        let ok = e.point <= upper + 3.0 * e.stderr && e.point >= lower - 3.0 * e.stderr;
        pass &= ok;
        parts.push(format!("t={t}: {lower:.4e} <= {:.4e} <= {upper:.4e}{}", e.point, if ok { "" } else { " (violated)" }));
    }
    Outcome { pass, detail: parts.join("; ") }
}

/// Test-side inversion of `P(C X > s) = q` by bisection on the quadrature tail.
fn quadrature_quantile(w: &WeightModel, m: &MarginalModel, q: f64) -> f64 {
    let (mut lo, mut hi) = (1e-3f64.ln(), 1e6f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if scale_mixture_tail(w, m, mid.exp()).unwrap() > q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn lcr_template() -> Outcome {
    let (code, out) = cli(&["risk", "--scenario", &scenario_path("lcr_lognormal.json"), "--p", "0.999", "--quiet"]);
    if code != 0 {
        return Outcome { pass: false, detail: format!("risk exited with {code}: {out}") };
    }
    let var: f64 = out.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let oracle = quadrature_quantile(&WeightModel::beta(2.0, 3.0, 1.0).unwrap(), &MarginalModel::lognormal(0.0, 1.0).unwrap(), 1e-3);
    let var_ok = rel(var, oracle) < 1e-6;
    let loaded = ostail::cli::load(std::path::Path::new(&scenario_path("lcr_lognormal.json"))).unwrap();
    let xs = sample_lc_parallel(&loaded.scenario, &McConfig::new(10_000_000, 42));
    let r99 = empirical_tail(&xs, 0.99).unwrap();
    let r999 = empirical_tail(&xs, 0.999).unwrap();
    let (q99, q999) = (r99.es / r99.var, r999.es / r999.var);
    Outcome {
        pass: var_ok && q999 < q99,
        detail: format!(
            "VaR_0.999 {var:.9e} vs quadrature quantile {oracle:.9e} (rel {:.1e}); empirical ES/VaR {q99:.4} at 0.99, {q999:.4} at 0.999",
            rel(var, oracle)
        ),
    }
}

fn condition_checks() -> Outcome {
    let (code, out) = cli(&["check-conditions", "--scenario", &scenario_path("frechet_pareto.json"), "--quiet"]);
    let frechet_ok = code == 0 && out.lines().skip(1).all(|l| l.ends_with("consistent-with-→0")) && out.lines().count() > 1;
    let dir = std::env::temp_dir().join(format!("ostail-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("lognormal_0999.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "k": 2,
            "marginals": [{"family": "lognormal", "params": {"mu": 0.0, "sigma": 1.0}}],
            "correlation": [[1.0, 0.999], [0.999, 1.0]],
            "weights": [{"kind": "beta", "params": {"a": 2.0, "b": 3.0}}]}"#,
    )
    .unwrap();
    let (code2, out2) = cli(&["check-conditions", "--scenario", path.to_str().unwrap(), "--quiet"]);
    let flagged: Vec<&str> = out2.lines().skip(1).filter(|l| l.ends_with("non-vanishing")).collect();
    let pairs_flagged = ["1,2", "2,1"].iter().all(|p| flagged.iter().any(|l| l.split(',').skip(1).take(2).collect::<Vec<_>>().join(",") == *p));
    let _ = std::fs::remove_dir_all(&dir);
    Outcome {
        pass: frechet_ok && code2 == 0 && pairs_flagged,
        detail: format!("independent Pareto all consistent: {frechet_ok}; rho=0.999 LogNormal rows flagged: {} of {}", flagged.len(), out2.lines().count() - 1),
    }
}

fn reproducibility_and_coverage() -> Outcome {
    let path = scenario_path("frechet_pareto.json");
    let args = ["compare", "--scenario", &path, "--t-grid", "1e1:1e2:3", "--method", "conditional", "--samples", "100000", "--seed", "42", "--workers", "4"];
    let (c1, a) = cli(&args);
    let (c2, b) = cli(&args);
    let identical = c1 == 0 && c2 == 0 && a == b;

    let p = MarginalModel::pareto(2.0, 1.0).unwrap();
    let u = WeightModel::uniform(1.0).unwrap();
    let s = scenario(vec![p], vec![u.clone()]);
    let t = 3.0;
    let truth = scale_mixture_tail(&u, &p, t).unwrap();
    let covered = (0..200u64)
        .filter(|&seed| {
            let e = crude(&s, t, &McConfig::new(2_000, seed).with_workers(1)).unwrap();
            e.ci95.0 <= truth && truth <= e.ci95.1
        })
        .count();
    Outcome { pass: identical && covered >= 180, detail: format!("byte-identical CSV: {identical}; coverage {covered}/200") }
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("1 Breiman exactness", Duration::from_secs(1), breiman_exactness),
        ("2 regularly varying main approximation", Duration::from_secs(60), frechet_main),
        ("3 sum form", Duration::from_secs(90), sum_form),
        ("4 Gumbel Model A", Duration::from_secs(5), model_a),
        ("5 Gumbel Model B", Duration::from_secs(10), model_b),
        ("6 eta constant", Duration::from_secs(5), eta_constant),
        ("7 Bonferroni sandwich", Duration::from_secs(60), bonferroni),
        ("8 LCR template end to end", Duration::from_secs(180), lcr_template),
        ("9 condition checker", Duration::from_secs(60), condition_checks),
        ("10 reproducibility and coverage", Duration::from_secs(60), reproducibility_and_coverage),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let pass = o.pass && took <= budget;
        failed += usize::from(!pass);
        println!("{} criterion {name}: {} [{:.2}s of {}s]", if pass { "PASS" } else { "FAIL" }, o.detail, took.as_secs_f64(), budget.as_secs());
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
