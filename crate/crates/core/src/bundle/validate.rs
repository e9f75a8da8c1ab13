use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::load::SHARE_TOLERANCE;
use super::{ScenarioBundle, PALLIATIVE_RESOURCE, WARD_RESOURCE};
use crate::model::{CancerType, CellKey, MoneyBySector, Population, Sex, StageClass, StageId};

/// Relative tolerance between life-table deaths and the epidemiological death count.
pub const LIFE_TABLE_DEATHS_TOLERANCE: f64 = 0.005;
/// Absolute gap between the stated m:i ratio and deaths/incidence that triggers a warning.
pub const MI_RATIO_WARNING_GAP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}[{}]: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }

    fn error(&mut self, code: &'static str, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Error,
            code,
            message: message.into(),
        });
    }

    fn warn(&mut self, code: &'static str, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Warning,
            code,
            message: message.into(),
        });
    }

    fn fraction(&mut self, code: &'static str, what: impl fmt::Display, v: f64) {
        if !(0.0..=1.0).contains(&v) {
            self.error(code, format!("{what} = {v} outside [0, 1]"));
        }
    }

    fn nonnegative(&mut self, code: &'static str, what: impl fmt::Display, v: f64) {
        if !(v >= 0.0) {
            self.error(code, format!("{what} = {v} is negative"));
        }
    }

    fn unit_sum(&mut self, code: &'static str, what: impl fmt::Display, sum: f64) {
        if (sum - 1.0).abs() > SHARE_TOLERANCE {
            self.error(code, format!("{what} sum to {sum}, expected 1"));
        }
    }

    fn money(&mut self, code: &'static str, what: impl fmt::Display, m: &MoneyBySector) {
        if !m.is_nonnegative() {
            self.error(code, format!("{what} has a negative sector value"));
        }
    }
}

/// Checks every invariant of the bundle. Errors block execution, warnings do not.
pub fn validate_bundle(bundle: &ScenarioBundle) -> ValidationReport {
    let mut r = ValidationReport::default();
    for note in &bundle.load_notes {
        r.warn("renormalized", note.clone());
    }
    check_manifest(bundle, &mut r);
    check_epi(bundle, &mut r);
    check_stages(bundle, &mut r);
    check_survival(bundle, &mut r);
    check_life_table(bundle, &mut r);
    check_weights(bundle, &mut r);
    check_costs(bundle, &mut r);
    check_drugs(bundle, &mut r);
    check_adverse_events(bundle, &mut r);
    check_deaths(bundle, &mut r);
    r
}

fn check_manifest(b: &ScenarioBundle, r: &mut ValidationReport) {
    let m = &b.manifest;
    if !(m.exchange_rate > 0.0) {
        r.error("exchange_rate", format!("exchange rate {} must be positive", m.exchange_rate));
    }
    let s = &m.sector_shares;
    r.fraction("sector_shares", "public share", s.public);
    r.fraction("sector_shares", "social security share", s.social_security);
    r.fraction("sector_shares", "private share", s.private);
    r.unit_sum("sector_shares", "sector shares", s.sum());

    let (lo, hi) = m.mc_defaults.percentiles;
    if !(lo > 0.0 && hi < 100.0 && lo < hi) {
        r.error(
            "percentiles",
            format!("percentiles ({lo}, {hi}) must be strictly increasing within (0, 100)"),
        );
    }
    if m.mc_defaults.iterations == 0 {
        r.error("iterations", "Monte Carlo iterations must be at least 1");
    }
    let u = &m.uncertainty;
    r.nonnegative("uncertainty", "deaths half-width", u.deaths_halfwidth);
    r.nonnegative("uncertainty", "cost half-width", u.cost_halfwidth);
    r.nonnegative("uncertainty", "m:i half-width", u.mi_ratio_halfwidth);
    if let Some(d) = &m.denominators {
        for (name, v) in [
            ("gdp_usd", d.gdp_usd),
            ("total_health_expenditure_usd", d.total_health_expenditure_usd),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    r.error("denominators", format!("{name} = {v} must be positive"));
                }
            }
        }
    }
}

fn check_epi(b: &ScenarioBundle, r: &mut ValidationReport) {
    let e = &b.epi;
    r.nonnegative("epi_counts", "incidence", e.incidence);
    r.nonnegative("epi_counts", "1-year prevalence", e.prevalence_1y);
    r.nonnegative("epi_counts", "5-year prevalence", e.prevalence_5y);
    r.nonnegative("epi_counts", "deaths", e.deaths);
    if e.prevalence_1y > e.prevalence_5y {
        r.error(
            "prevalence_order",
            format!(
                "1-year prevalence {} exceeds 5-year prevalence {}",
                e.prevalence_1y, e.prevalence_5y
            ),
        );
    }
    if let Some(p3) = e.prevalence_3y {
        if !(p3 >= e.prevalence_1y && p3 <= e.prevalence_5y) {
            r.error(
                "prevalence_order",
                format!("3-year prevalence {p3} outside [1-year, 5-year] prevalence"),
            );
        }
    }
    if e.prevalence_1y > e.incidence {
        r.error(
            "prevalence_order",
            format!(
                "1-year prevalence {} exceeds incidence {}",
                e.prevalence_1y, e.incidence
            ),
        );
    }
    if !(e.mi_ratio > 0.0 && e.mi_ratio <= 1.0) {
        r.error("mi_ratio", format!("m:i ratio {} outside (0, 1]", e.mi_ratio));
    } else if e.incidence > 0.0 && (e.deaths / e.incidence - e.mi_ratio).abs() > MI_RATIO_WARNING_GAP
    {
        r.warn(
            "mi_ratio",
            format!(
                "stated m:i ratio {} differs from deaths/incidence {:.4}",
                e.mi_ratio,
                e.deaths / e.incidence
            ),
        );
    }
    r.fraction("sex_split", "incident male fraction", e.sex_split_incident);
    if let Some(p) = e.sex_split_prevalent_deaths {
        r.fraction("sex_split", "prevalent-death male fraction", p);
    }
    for sex in Sex::ALL {
        let m = e.survival_multiplier(sex);
        if !(m > 0.0) {
            r.error(
                "survival_multiplier",
                format!("{} survival multiplier {m} must be positive", sex.as_str()),
            );
        }
    }
}

fn check_stages(b: &ScenarioBundle, r: &mut ValidationReport) {
    let d = &b.stages;
    for ty in CancerType::ALL {
        r.fraction("type_shares", format!("{} share", ty.as_str()), d.type_shares[ty.index()]);
        for &s in ty.stages() {
            r.fraction("stage_shares", format!("{s} share"), d.stage_share(s));
        }
        let sum: f64 = ty.stages().iter().map(|&s| d.stage_share(s)).sum();
        r.unit_sum("stage_shares", format!("{} stage shares", ty.as_str()), sum);
    }
    r.unit_sum("type_shares", "cancer type shares", d.type_shares.iter().sum());
}

fn check_survival(b: &ScenarioBundle, r: &mut ValidationReport) {
    for stage in StageId::ALL {
        let row = b.survival.row(stage);
        for (k, &p) in row.iter().enumerate() {
            r.fraction("survival_range", format!("S({stage}, {})", k + 1), p);
        }
        for k in 1..row.len() {
            if row[k] > row[k - 1] {
                r.error(
                    "survival_monotone",
                    format!(
                        "survival not monotone for {stage}: S({}) = {} > S({}) = {}",
                        k + 1,
                        row[k],
                        k,
                        row[k - 1]
                    ),
                );
            }
        }
    }
}

fn check_life_table(b: &ScenarioBundle, r: &mut ValidationReport) {
    let lt = &b.life_table;
    let mut seen = BTreeSet::new();
    for row in &lt.rows {
        let what = format!("{} {}", row.sex.as_str(), row.age_group);
        r.nonnegative("life_table", format!("deaths of {what}"), row.deaths);
        r.nonnegative("life_table", format!("life expectancy of {what}"), row.life_expectancy);
        if !seen.insert((row.sex, row.age_group.clone())) {
            r.error("life_table", format!("duplicate life-table row {what}"));
        }
    }
    for sex in Sex::ALL {
        let les: Vec<_> = lt.rows.iter().filter(|x| x.sex == sex).collect();
        for pair in les.windows(2) {
            if pair[1].life_expectancy > pair[0].life_expectancy {
                r.warn(
                    "life_expectancy_order",
                    format!(
                        "{} life expectancy rises from {} ({}) to {} ({})",
                        sex.as_str(),
                        pair[0].life_expectancy,
                        pair[0].age_group,
                        pair[1].life_expectancy,
                        pair[1].age_group
                    ),
                );
            }
        }
    }
    let total = lt.deaths(Sex::Male) + lt.deaths(Sex::Female);
    let target = b.epi.deaths;
    if target > 0.0 && ((total - target) / target).abs() > LIFE_TABLE_DEATHS_TOLERANCE {
        r.error(
            "life_table_deaths",
            format!("life-table deaths {total} differ from epidemiological deaths {target} by more than 0.5%"),
        );
    }
}

fn check_weights(b: &ScenarioBundle, r: &mut ValidationReport) {
    for pop in Population::ALL {
        for class in StageClass::ALL {
            match b.disability_weights.get(pop, class) {
                Some(w) => r.fraction(
                    "disability_weight",
                    format!("weight ({}, {})", pop.as_str(), class.as_str()),
                    w,
                ),
                None => r.error(
                    "disability_weight",
                    format!("missing disability weight ({}, {})", pop.as_str(), class.as_str()),
                ),
            }
        }
    }
}

fn check_costs(b: &ScenarioBundle, r: &mut ValidationReport) {
    for u in b.unit_costs.rows() {
        r.money("unit_cost", format!("unit cost {}", u.resource), &u.cost);
    }
    for p in &b.profiles.rows {
        r.nonnegative("profile_quantity", format!("quantity of {} in {}", p.resource, p.cell), p.quantity);
        if b.unit_costs.get(&p.resource).is_none() {
            r.error("unknown_resource", format!("{} references unknown resource {}", p.cell, p.resource));
        }
    }
}

fn check_drugs(b: &ScenarioBundle, r: &mut ValidationReport) {
    for cell in CellKey::all() {
        let entry = b.drugs.entries.get(&cell);
        let regimens: Vec<_> = b.drugs.regimens_for(cell).collect();
        if let Some(e) = entry {
            if let Some(c) = e.cost_per_patient_year {
                r.nonnegative("drug_cost", format!("drug cost of {cell}"), c);
            }
            if let Some(s) = e.drug_share_of_total {
                r.fraction("drug_share", format!("drug share of {cell}"), s);
            }
        }
        let has_cost = entry.and_then(|e| e.cost_per_patient_year).is_some();
        if !has_cost && regimens.is_empty() {
            r.error("drug_cost", format!("{cell} has neither a drug cost nor regimen rows"));
        }
        for reg in &regimens {
            r.fraction("regimen_share", format!("share of {} in {cell}", reg.regimen), reg.share_of_drug_cost);
            r.nonnegative("regimen_cost", format!("cost of {} in {cell}", reg.regimen), reg.cost_per_patient_year);
        }
        let covered: f64 = regimens.iter().map(|x| x.share_of_drug_cost).sum();
        if covered > 1.0 + SHARE_TOLERANCE {
            r.error("regimen_share", format!("regimen shares of {cell} sum to {covered} > 1"));
        }
    }
}

fn check_adverse_events(b: &ScenarioBundle, r: &mut ValidationReport) {
    let ae = &b.adverse_events;
    for rate in &ae.rates {
        r.fraction("ae_rate", format!("rate of {} under {}", rate.event, rate.class.as_str()), rate.rate);
        if ae.cost(&rate.event).is_none() {
            r.error("ae_cost", format!("adverse event {} has a rate but no cost", rate.event));
        }
    }
    for (event, cost) in &ae.costs {
        r.money("ae_cost", format!("cost of {event}"), cost);
    }
    for cell in CellKey::all() {
        match ae.class_mix.get(&cell) {
            Some(mix) => {
                for (class, share) in mix {
                    r.fraction("class_mix", format!("{} share in {cell}", class.as_str()), *share);
                }
                r.unit_sum("class_mix", format!("class mix of {cell}"), mix.iter().map(|x| x.1).sum());
            }
            None => r.error("class_mix", format!("missing regimen class mix for {cell}")),
        }
    }
}

fn check_deaths(b: &ScenarioBundle, r: &mut ValidationReport) {
    let d = &b.death_costs;
    r.nonnegative("death_costs", "incident ward days", d.incident_ward_days);
    r.nonnegative("death_costs", "prevalent treatment fraction", d.prevalent_formula.treatment_fraction);
    r.nonnegative("death_costs", "prevalent palliative units", d.prevalent_formula.palliative_units);
    r.nonnegative("death_costs", "prevalent ward days", d.prevalent_formula.ward_days);
    if b.unit_costs.get(WARD_RESOURCE).is_none() {
        r.error("death_costs", format!("unit cost table lacks the {WARD_RESOURCE} resource"));
    }
    let formula_needed = StageId::ALL
        .iter()
        .any(|s| !d.prevalent_overrides.contains_key(s));
    if formula_needed && b.unit_costs.get(PALLIATIVE_RESOURCE).is_none() {
        r.error(
            "death_costs",
            format!("unit cost table lacks the {PALLIATIVE_RESOURCE} resource needed by the death-cost formula"),
        );
    }
    for (stage, cost) in &d.prevalent_overrides {
        r.money("death_costs", format!("death cost override of {stage}"), cost);
    }
    if let Some(mix) = &b.prevalent_death_mix {
        for stage in StageId::ALL {
            r.fraction("death_mix", format!("prevalent death share of {stage}"), mix[stage.index()]);
        }
        r.unit_sum("death_mix", "prevalent death mix", mix.iter().sum());
    }
}
