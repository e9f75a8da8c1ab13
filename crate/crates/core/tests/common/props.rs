//! Property checks shared by the property test target and the acceptance
//! runner. Each check drives its own proptest runner.

use proptest::prelude::*;
use proptest::sample::Index;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use lcburden::bundle::{
    load_bundle, validate_bundle, write_bundle, EpiInputs, LifeTableDeaths, LifeTableRow,
    DisabilityWeights, ScenarioBundle, StageDistribution, SurvivalTable,
};
use lcburden::burden::composition_breakdown;
use lcburden::costing::{build_cost_cards, CostCards};
use lcburden::epidemiology::{
    calibrate_prevalence, decompose_cases, roll_forward, split_deaths, CaseMatrix,
};
use lcburden::health_loss::{compute_yld, compute_yll};
use lcburden::model::{
    CellKey, MoneyBySector, Population, RegimenClass, Sector, Sex, StageClass, StageId,
};

use super::shipped;

pub type Check = fn(&mut TestRunner) -> Result<(), String>;

/// Every property with its display name.
pub const ALL: [(&str, Check); 9] = [
    ("case conservation", case_conservation),
    ("death conservation", death_conservation),
    ("YLL linearity and row-order invariance", yll_linearity),
    ("YLD linearity", yld_linearity),
    ("cost-card monotonicity", card_monotonicity),
    ("cost-card homogeneity", card_homogeneity),
    ("category breakdown completeness", category_completeness),
    ("bundle round-trip", bundle_roundtrip),
    ("validator catches single-field corruptions", validator_fuzz),
];

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn stage_distribution() -> impl Strategy<Value = StageDistribution> {
    (
        prop::array::uniform2(0.01..1.0f64),
        prop::array::uniform4(0.01..1.0f64),
        prop::array::uniform2(0.01..1.0f64),
    )
        .prop_map(|(t, n, s)| {
            let t = normalized(&t);
            let n = normalized(&n);
            let s = normalized(&s);
            StageDistribution {
                type_shares: [t[0], t[1]],
                stage_shares: [n[0], n[1], n[2], n[3], s[0], s[1]],
            }
        })
}

fn survival_table() -> impl Strategy<Value = SurvivalTable> {
    prop::array::uniform6(prop::array::uniform5(0.01..1.0f64)).prop_map(|rows| {
        let mut probabilities = [[0.0; 5]; 6];
        for (out, mut row) in probabilities.iter_mut().zip(rows) {
            row.sort_by(|a, b| b.total_cmp(a));
            *out = row;
        }
        SurvivalTable { probabilities }
    })
}

fn epi(incidence: f64, p1: f64, p5: f64, deaths: f64, male: f64) -> EpiInputs {
    EpiInputs {
        incidence,
        prevalence_1y: p1,
        prevalence_3y: None,
        prevalence_5y: p5,
        deaths,
        mi_ratio: 0.9,
        sex_split_incident: male,
        sex_split_prevalent_deaths: None,
        survival_multiplier: [1.0, 1.0],
    }
}

/// Decomposition, roll-forward and calibration conserve their targets.
pub fn case_conservation(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (
        1.0..1e5f64,
        0.0..1.0f64,
        0.0..3.0f64,
        0.0..=1.0f64,
        stage_distribution(),
        survival_table(),
    );
    runner
        .run(&strategy, |(incidence, p1f, later, male, stages, survival)| {
            let p1 = incidence * p1f;
            let p5 = p1 + incidence * later;
            let cases = decompose_cases(incidence, &stages, male);
            prop_assert!(close(cases.population_total(Population::Incident), incidence, 1e-12));
            prop_assert!(close(
                cases.population_sex_total(Population::Incident, Sex::Male),
                incidence * male,
                1e-12
            ));
            let raw = roll_forward(&cases, &survival, [1.0, 1.0]);
            for st in StageId::ALL {
                for sx in Sex::ALL {
                    let cohort = cases.get(Population::Incident, st, sx);
                    for k in 1..=5 {
                        let v = raw.get(st, sx, k);
                        prop_assert!(v >= 0.0 && v <= cohort);
                        if k > 1 {
                            prop_assert!(v <= raw.get(st, sx, k - 1));
                        }
                    }
                }
            }
            let (prev, f) = calibrate_prevalence(&raw, &epi(incidence, p1, p5, 0.0, male))
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(f.year1 >= 0.0 && f.years_2_to_5 >= 0.0);
            prop_assert!(close(prev.population_total(Population::Prevalent), p5, 1e-12));
            prop_assert!(close(f.year1 * raw.year_total(1), p1, 1e-12));
            for st in StageId::ALL {
                for sx in Sex::ALL {
                    prop_assert!(prev.get(Population::Prevalent, st, sx) >= 0.0);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Incident plus prevalent deaths reproduce the death count exactly for
/// whole-number inputs, and the sex split conserves each row.
pub fn death_conservation(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (1u32..200_000, 0.0..=1.0f64, 0u32..100_000, 0.0..=1.0f64, 0.0..=1.0f64);
    runner
        .run(&strategy, |(incidence, p1f, extra, male, prev_male)| {
            let incidence = incidence as f64;
            let p1 = (incidence * p1f).floor();
            let deaths = incidence - p1 + extra as f64;
            let mut e = epi(incidence, p1, p1 * 2.0, deaths, male);
            e.sex_split_prevalent_deaths = Some(prev_male);
            let d = split_deaths(&e).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(d.incident + d.prevalent, deaths);
            prop_assert!(d.prevalent >= 0.0);
            prop_assert!(close(d.incident_by_sex[0] + d.incident_by_sex[1], d.incident, 1e-12));
            prop_assert!(close(d.prevalent_by_sex[0] + d.prevalent_by_sex[1], d.prevalent, 1e-12));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn life_rows() -> impl Strategy<Value = Vec<(bool, f64, f64, f64)>> {
    prop::collection::vec((any::<bool>(), 0.0..5_000.0f64, 0.0..5_000.0f64, 0.0..90.0f64), 1..40)
}

fn table(rows: &[(bool, f64, f64, f64)], pick: impl Fn(f64, f64) -> f64) -> LifeTableDeaths {
    LifeTableDeaths {
        rows: rows
            .iter()
            .enumerate()
            .map(|(i, &(male, a, b, le))| LifeTableRow {
                sex: if male { Sex::Male } else { Sex::Female },
                age_group: format!("g{i}"),
                deaths: pick(a, b),
                life_expectancy: le,
            })
            .collect(),
    }
}

pub fn yll_linearity(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (life_rows(), 0.0..10.0f64, 0.0..10.0f64, any::<Index>());
    runner
        .run(&strategy, |(rows, alpha, beta, rot)| {
            let ya = compute_yll(&table(&rows, |a, _| a));
            let yb = compute_yll(&table(&rows, |_, b| b));
            let yc = compute_yll(&table(&rows, |a, b| alpha * a + beta * b));
            for s in 0..2 {
                prop_assert!(close(yc[s], alpha * ya[s] + beta * yb[s], 1e-9));
            }
            let mut shuffled = table(&rows, |a, _| a);
            shuffled.rows.reverse();
            let n = shuffled.rows.len();
            shuffled.rows.rotate_left(rot.index(n));
            let ys = compute_yll(&shuffled);
            for s in 0..2 {
                prop_assert!(close(ys[s], ya[s], 1e-12));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn matrix(values: &[f64]) -> CaseMatrix {
    let mut m = CaseMatrix::default();
    let mut it = values.iter();
    for p in Population::ALL {
        for st in StageId::ALL {
            for sx in Sex::ALL {
                m.set(p, st, sx, *it.next().unwrap());
            }
        }
    }
    m
}

pub fn yld_linearity(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (
        prop::collection::vec(0.0..10_000.0f64, 24),
        prop::collection::vec(0.0..10_000.0f64, 24),
        prop::array::uniform4(0.0..=1.0f64),
        0.0..10.0f64,
        0.0..10.0f64,
    );
    runner
        .run(&strategy, |(a, b, w, alpha, beta)| {
            let dw = DisabilityWeights::new(w[0], w[1], w[2], w[3]);
            let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect();
            let ya = compute_yld(&matrix(&a), &dw).unwrap();
            let yb = compute_yld(&matrix(&b), &dw).unwrap();
            let yc = compute_yld(&matrix(&c), &dw).unwrap();
            for p in Population::ALL {
                for st in StageId::ALL {
                    for sx in Sex::ALL {
                        let want = alpha * ya.get(p, st, sx) + beta * yb.get(p, st, sx);
                        prop_assert!(close(yc.get(p, st, sx), want, 1e-9));
                    }
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn sector_values(costs: &CostCards) -> Vec<f64> {
    let mut v = Vec::new();
    let mut push = |m: MoneyBySector| v.extend(Sector::ALL.map(|s| m.get(s)));
    for cell in CellKey::all() {
        push(costs.card(cell).total());
    }
    push(costs.deaths.incident);
    for st in StageId::ALL {
        push(costs.deaths.prevalent(st));
    }
    v
}

fn bump(m: &mut MoneyBySector, sector: usize, delta: f64) {
    match sector {
        0 => m.public += delta,
        1 => m.social_security += delta,
        _ => m.private += delta,
    }
}

/// Raising any quantity, rate, unit cost or drug cost never lowers a card.
pub fn card_monotonicity(runner: &mut TestRunner) -> Result<(), String> {
    let base = shipped();
    let before = sector_values(&build_cost_cards(base).unwrap());
    let strategy = (0usize..6, any::<Index>(), 0usize..3, 0.0..1_000.0f64);
    runner
        .run(&strategy, |(kind, idx, sector, delta)| {
            let mut b = base.clone();
            match kind {
                0 => {
                    let n = b.unit_costs.len();
                    let row = b.unit_costs.rows_mut().nth(idx.index(n)).unwrap();
                    bump(&mut row.cost, sector, delta);
                }
                1 => {
                    let i = idx.index(b.profiles.rows.len());
                    b.profiles.rows[i].quantity += delta / 100.0;
                }
                2 => {
                    let i = idx.index(b.adverse_events.rates.len());
                    b.adverse_events.rates[i].rate += delta / 1_000.0;
                }
                3 => {
                    let i = idx.index(b.adverse_events.costs.len());
                    bump(&mut b.adverse_events.costs[i].1, sector, delta);
                }
                4 => {
                    let n = b.drugs.entries.len();
                    let e = b.drugs.entries.values_mut().nth(idx.index(n)).unwrap();
                    if let Some(c) = e.cost_per_patient_year.as_mut() {
                        *c += delta;
                    }
                }
                _ => {
                    let n = b.death_costs.prevalent_overrides.len();
                    let o = b.death_costs.prevalent_overrides.values_mut().nth(idx.index(n)).unwrap();
                    bump(o, sector, delta);
                }
            }
            let after = sector_values(&build_cost_cards(&b).unwrap());
            for (x, y) in before.iter().zip(&after) {
                prop_assert!(y >= x, "value fell from {} to {}", x, y);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn scale_prices(b: &mut ScenarioBundle, lambda: f64) {
    for row in b.unit_costs.rows_mut() {
        row.cost = row.cost * lambda;
    }
    for e in b.drugs.entries.values_mut() {
        e.cost_per_patient_year = e.cost_per_patient_year.map(|c| c * lambda);
    }
    for r in &mut b.drugs.regimens {
        r.cost_per_patient_year *= lambda;
    }
    for (_, c) in &mut b.adverse_events.costs {
        *c = *c * lambda;
    }
    for c in b.death_costs.prevalent_overrides.values_mut() {
        *c = *c * lambda;
    }
}

/// Scaling every price by λ scales every card and death cost by λ.
pub fn card_homogeneity(runner: &mut TestRunner) -> Result<(), String> {
    let base = shipped();
    let before = sector_values(&build_cost_cards(base).unwrap());
    runner
        .run(&(0.01..100.0f64), |lambda| {
            let mut b = base.clone();
            scale_prices(&mut b, lambda);
            let after = sector_values(&build_cost_cards(&b).unwrap());
            for (x, y) in before.iter().zip(&after) {
                prop_assert!(close(*y, lambda * x, 1e-9));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn ae_class_cost(b: &ScenarioBundle, class: RegimenClass) -> MoneyBySector {
    b.adverse_events
        .rates
        .iter()
        .filter(|r| r.class == class)
        .fold(MoneyBySector::ZERO, |acc, r| {
            acc + *b.adverse_events.cost(&r.event).unwrap() * r.rate
        })
}

/// Category totals add up to an independently summed card, and category
/// shares sum to one.
pub fn category_completeness(runner: &mut TestRunner) -> Result<(), String> {
    let base = shipped();
    let n = base.profiles.rows.len();
    let strategy = prop::collection::vec(0.0..3.0f64, n);
    runner
        .run(&strategy, |factors| {
            let mut b = base.clone();
            for (row, f) in b.profiles.rows.iter_mut().zip(&factors) {
                row.quantity *= f;
            }
            let cards = build_cost_cards(&b).unwrap();
            for cell in CellKey::all() {
                let mut oracle = MoneyBySector::ZERO;
                for row in b.profiles.rows.iter().filter(|r| r.cell == cell) {
                    oracle += b.unit_costs.get(&row.resource).unwrap().cost * row.quantity;
                }
                let drug = b.drugs.entries[&cell].cost_per_patient_year.unwrap();
                oracle += MoneyBySector::uniform(drug);
                for &(class, share) in &b.adverse_events.class_mix[&cell] {
                    oracle += ae_class_cost(&b, class) * share;
                }
                let card = cards.card(cell);
                let total = card.total();
                let summed = card
                    .categories
                    .iter()
                    .fold(MoneyBySector::ZERO, |acc, (_, m)| acc + m);
                for s in Sector::ALL {
                    prop_assert!(close(total.get(s), oracle.get(s), 1e-9));
                    prop_assert!(close(summed.get(s), total.get(s), 1e-12));
                }
                let comp = composition_breakdown(card, b.shares());
                let shares = comp.weighted.unwrap();
                prop_assert!(close(shares.iter().sum::<f64>(), 1.0, 1e-9));
                for sector in comp.by_sector {
                    prop_assert!(close(sector.unwrap().iter().sum::<f64>(), 1.0, 1e-9));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Writing a bundle and loading it back yields an equal bundle.
pub fn bundle_roundtrip(runner: &mut TestRunner) -> Result<(), String> {
    let base = shipped();
    let strategy = (
        0.5..2.0f64,
        any::<Index>(),
        0.0..10_000.0f64,
        any::<Index>(),
        0.0..5.0f64,
        0.0..=1.0f64,
        any::<u64>(),
        1usize..100_000,
        prop::option::of(1.0..1e12f64),
    );
    runner
        .run(&strategy, |(scale, ui, cost, pi, qty, male, seed, iters, gdp)| {
            let mut b = base.clone();
            b.epi.incidence *= scale;
            b.epi.prevalence_3y = Some(b.epi.prevalence_1y * scale);
            b.epi.sex_split_incident = male;
            let n = b.unit_costs.len();
            b.unit_costs.rows_mut().nth(ui.index(n)).unwrap().cost.private = cost;
            let i = pi.index(b.profiles.rows.len());
            b.profiles.rows[i].quantity = qty;
            b.manifest.mc_defaults.seed = seed;
            b.manifest.mc_defaults.iterations = iters;
            b.manifest.denominators = gdp.map(|g| lcburden::bundle::Denominators {
                gdp_usd: Some(g),
                total_health_expenditure_usd: None,
            });
            let dir = tempfile::tempdir().unwrap();
            write_bundle(&b, dir.path()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let back = load_bundle(dir.path()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(back, b);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

type Corruption = (&'static str, fn(&mut ScenarioBundle, Index, f64));

/// One single-field corruption per bundle invariant, with the issue code it must raise.
pub const CORRUPTIONS: [Corruption; 28] = [
    ("exchange_rate", |b, _, m| b.manifest.exchange_rate = -m),
    ("percentiles", |b, _, _| {
        let (lo, hi) = b.manifest.mc_defaults.percentiles;
        b.manifest.mc_defaults.percentiles = (hi, lo);
    }),
    ("iterations", |b, _, _| b.manifest.mc_defaults.iterations = 0),
    ("uncertainty", |b, _, m| b.manifest.uncertainty.cost_halfwidth = -m),
    ("sector_shares", |b, i, m| match i.index(3) {
        0 => b.manifest.sector_shares.public = -m,
        1 => b.manifest.sector_shares.social_security += m,
        _ => b.manifest.sector_shares.private = 1.0 + m,
    }),
    ("epi_counts", |b, i, m| match i.index(4) {
        0 => b.epi.incidence = -m,
        1 => b.epi.prevalence_1y = -m,
        2 => b.epi.prevalence_5y = -m,
        _ => b.epi.deaths = -m,
    }),
    ("prevalence_order", |b, _, m| b.epi.prevalence_1y = b.epi.prevalence_5y + m),
    ("mi_ratio", |b, i, m| {
        b.epi.mi_ratio = match i.index(3) {
            0 => 0.0,
            1 => -m,
            _ => 1.0 + m,
        }
    }),
    ("sex_split", |b, i, m| {
        if i.index(2) == 0 {
            b.epi.sex_split_incident = 1.0 + m;
        } else {
            b.epi.sex_split_prevalent_deaths = Some(-m);
        }
    }),
    ("type_shares", |b, i, m| b.stages.type_shares[i.index(2)] += m),
    ("stage_shares", |b, i, m| b.stages.stage_shares[i.index(6)] += m / 10.0),
    ("survival_range", |b, i, m| {
        let k = i.index(30);
        b.survival.probabilities[k / 5][k % 5] = if k % 2 == 0 { -m } else { 1.0 + m };
    }),
    ("survival_monotone", |b, i, m| {
        let k = i.index(24);
        let (row, year) = (k / 4, k % 4 + 1);
        let p = &mut b.survival.probabilities[row];
        p[year] = (p[year - 1] + 0.001 + m / 100.0).min(1.0);
        if p[year] <= p[year - 1] {
            p[year - 1] = 0.5;
            p[year] = 0.6;
        }
    }),
    ("life_table", |b, i, m| {
        let n = b.life_table.rows.len();
        let row = &mut b.life_table.rows[i.index(n)];
        row.life_expectancy = -m;
    }),
    ("life_table_deaths", |b, i, m| {
        let n = b.life_table.rows.len();
        b.life_table.rows[i.index(n)].deaths += 0.006 * b.epi.deaths * (1.0 + m);
    }),
    ("disability_weight", |b, i, m| {
        let k = i.index(8);
        let pop = Population::ALL[k % 2];
        let class = StageClass::ALL[(k / 2) % 2];
        if k < 4 {
            b.disability_weights.set(pop, class, 1.0 + m);
        } else {
            b.disability_weights.weights[pop.index()][class.index()] = None;
        }
    }),
    ("unit_cost", |b, i, m| {
        let n = b.unit_costs.len();
        b.unit_costs.rows_mut().nth(i.index(n)).unwrap().cost.social_security = -m;
    }),
    ("profile_quantity", |b, i, m| {
        let n = b.profiles.rows.len();
        b.profiles.rows[i.index(n)].quantity = -m;
    }),
    ("unknown_resource", |b, i, _| {
        let n = b.profiles.rows.len();
        b.profiles.rows[i.index(n)].resource = "no_such_resource".into();
    }),
    ("drug_cost", |b, i, m| {
        let n = b.drugs.entries.len();
        let e = b.drugs.entries.values_mut().nth(i.index(n)).unwrap();
        e.cost_per_patient_year = Some(-m);
    }),
    ("drug_share", |b, i, m| {
        let n = b.drugs.entries.len();
        b.drugs.entries.values_mut().nth(i.index(n)).unwrap().drug_share_of_total = Some(1.0 + m);
    }),
    ("regimen_share", |b, i, m| {
        let n = b.drugs.regimens.len();
        b.drugs.regimens[i.index(n)].share_of_drug_cost = 1.0 + m;
    }),
    ("ae_rate", |b, i, m| {
        let n = b.adverse_events.rates.len();
        b.adverse_events.rates[i.index(n)].rate = 1.0 + m;
    }),
    ("ae_cost", |b, i, m| {
        let n = b.adverse_events.costs.len();
        b.adverse_events.costs[i.index(n)].1.public = -m;
    }),
    ("class_mix", |b, i, m| {
        let n = b.adverse_events.class_mix.len();
        let mix = b.adverse_events.class_mix.values_mut().nth(i.index(n)).unwrap();
        mix[0].1 += m / 10.0;
    }),
    ("death_costs", |b, i, m| match i.index(5) {
        0 => b.death_costs.incident_ward_days = -m,
        1 => b.death_costs.prevalent_formula.treatment_fraction = -m,
        2 => b.death_costs.prevalent_formula.palliative_units = -m,
        3 => b.death_costs.prevalent_formula.ward_days = -m,
        _ => {
            let o = b.death_costs.prevalent_overrides.values_mut().next().unwrap();
            o.private = -m;
        }
    }),
    ("death_mix", |b, i, m| {
        let mix = b.prevalent_death_mix.as_mut().unwrap();
        mix[i.index(6)] += m / 10.0;
    }),
    ("survival_multiplier", |b, i, m| b.epi.survival_multiplier[i.index(2)] = -m),
];

pub fn validator_fuzz(runner: &mut TestRunner) -> Result<(), String> {
    let base = shipped();
    if validate_bundle(base).has_errors() {
        return Err("shipped bundle has validation errors".into());
    }
    let strategy = (0..CORRUPTIONS.len(), any::<Index>(), 0.01..10.0f64);
    runner
        .run(&strategy, |(which, idx, magnitude)| {
            let (code, corrupt) = CORRUPTIONS[which];
            let mut b = base.clone();
            corrupt(&mut b, idx, magnitude);
            let report = validate_bundle(&b);
            prop_assert!(
                report.errors().any(|i| i.code == code),
                "corruption {} not reported as an error: {:?}",
                code,
                report.issues
            );
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    // every corruption at least once, independent of sampling
    for (code, corrupt) in CORRUPTIONS {
        let mut b = base.clone();
        let idx = any::<Index>().new_tree(runner).map_err(|e| e.to_string())?.current();
        corrupt(&mut b, idx, 0.5);
        if !validate_bundle(&b).errors().any(|i| i.code == code) {
            return Err(format!("corruption {code} not caught"));
        }
    }
    Ok(())
}
