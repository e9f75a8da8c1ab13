//! National burden: case counts times cost cards, death rows, subtotals and
//! the flat metric list the Monte Carlo summarizes.

use serde::Serialize;

use crate::bundle::{EpiInputs, ScenarioBundle};
use crate::costing::{build_cost_cards, CostCards, DeathCostCard, PatientCostCard};
use crate::epidemiology::{
    prevalent_death_mix, run_epidemiology, split_deaths, DeathMixRule, DeathSplit, Epidemiology,
};
use crate::error::{ModelError, ModelResult};
use crate::health_loss::{compute_daly, compute_yld, compute_yll, HealthLossSummary};
use crate::model::{
    CellKey, CompositionCategory, MoneyBySector, Population, Sector, SectorShares, Sex, StageId,
};

/// Cases × per-sector share × per-sector card value. The sector columns
/// already carry the coverage shares, so their sum is the weighted total.
pub fn cell_burden(cases: f64, card: &MoneyBySector, shares: &SectorShares) -> MoneyBySector {
    card.apportion(shares) * cases
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeathRow {
    pub population: Population,
    pub deaths_by_sex: [f64; 2],
    pub cost_by_sex: [MoneyBySector; 2],
}

impl DeathRow {
    pub fn deaths(&self) -> f64 {
        self.deaths_by_sex[0] + self.deaths_by_sex[1]
    }

    pub fn cost(&self) -> MoneyBySector {
        self.cost_by_sex[0] + self.cost_by_sex[1]
    }
}

/// Incident and prevalent death rows. Prevalent deaths spread over stages by
/// `mix`, each priced at its stage's death cost.
pub fn death_burden(
    split: &DeathSplit,
    costs: &DeathCostCard,
    mix: &[f64; 6],
    shares: &SectorShares,
) -> ModelResult<[DeathRow; 2]> {
    let sum: f64 = mix.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(ModelError::MixNotNormalized {
            what: "prevalent death mix".into(),
            sum,
        });
    }
    let prevalent_unit = StageId::ALL.iter().fold(MoneyBySector::ZERO, |acc, &st| {
        acc + costs.prevalent(st) * mix[st.index()]
    });
    let row = |population, unit: MoneyBySector| {
        let deaths_by_sex = Sex::ALL.map(|s| split.get(population, s));
        DeathRow {
            population,
            deaths_by_sex,
            cost_by_sex: deaths_by_sex.map(|d| cell_burden(d, &unit, shares)),
        }
    };
    Ok([
        row(Population::Incident, costs.incident),
        row(Population::Prevalent, prevalent_unit),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellBurden {
    pub cell: CellKey,
    pub sex: Sex,
    pub cases: f64,
    pub cost: MoneyBySector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ratios {
    pub share_of_health_expenditure: Option<f64>,
    pub share_of_gdp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurdenReport {
    /// One row per (population, stage, sex), population-major then stage then sex.
    pub cells: Vec<CellBurden>,
    pub death_rows: [DeathRow; 2],
    /// Cell costs per population, death rows excluded.
    pub subtotals: [MoneyBySector; 2],
    pub grand_total: MoneyBySector,
    pub ratios: Option<Ratios>,
    pub health: HealthLossSummary,
    pub prevalent_death_mix: [f64; 6],
    pub epidemiology: Epidemiology,
    pub costs: CostCards,
}

impl BurdenReport {
    pub fn cell(&self, cell: CellKey, sex: Sex) -> &CellBurden {
        &self.cells[cell.index() * 2 + sex.index()]
    }

    pub fn cell_cases(&self, cell: CellKey) -> f64 {
        Sex::ALL.iter().map(|&s| self.cell(cell, s).cases).sum()
    }

    pub fn cell_cost(&self, cell: CellKey) -> MoneyBySector {
        self.cell(cell, Sex::Male).cost + self.cell(cell, Sex::Female).cost
    }

    pub fn death_row(&self, population: Population) -> &DeathRow {
        &self.death_rows[population.index()]
    }

    pub fn subtotal(&self, population: Population) -> MoneyBySector {
        self.subtotals[population.index()]
    }

    pub fn subtotal_cases(&self, population: Population) -> f64 {
        StageId::ALL
            .iter()
            .map(|&st| self.cell_cases(CellKey::new(population, st)))
            .sum()
    }

    /// Cell costs for one sex in `population`, death rows excluded.
    pub fn sex_subtotal(&self, population: Population, sex: Sex) -> MoneyBySector {
        self.cells
            .iter()
            .filter(|c| c.cell.population == population && c.sex == sex)
            .fold(MoneyBySector::ZERO, |acc, c| acc + c.cost)
    }

    /// Everything attributable to one sex, death rows included.
    pub fn sex_total(&self, sex: Sex) -> MoneyBySector {
        Population::ALL.iter().fold(MoneyBySector::ZERO, |acc, &p| {
            acc + self.sex_subtotal(p, sex) + self.death_row(p).cost_by_sex[sex.index()]
        })
    }

    pub fn sector_total(&self, sector: Sector) -> f64 {
        self.grand_total.get(sector)
    }
}

/// Category shares of one card, per sector and weighted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Composition {
    pub cell: CellKey,
    /// `None` when the card total is zero.
    pub weighted: Option<[f64; 9]>,
    pub by_sector: [Option<[f64; 9]>; 3],
}

fn shares_of(values: [f64; 9]) -> Option<[f64; 9]> {
    let total: f64 = values.iter().sum();
    (total > 0.0).then(|| values.map(|v| v / total))
}

pub fn composition_breakdown(card: &PatientCostCard, shares: &SectorShares) -> Composition {
    let per = |f: &dyn Fn(MoneyBySector) -> f64| {
        let mut v = [0.0; 9];
        for (cat, money) in card.categories.iter() {
            v[cat.index()] = f(money);
        }
        shares_of(v)
    };
    Composition {
        cell: card.cell,
        weighted: per(&|m| m.weighted(shares)),
        by_sector: Sector::ALL.map(|s| per(&|m: MoneyBySector| m.get(s))),
    }
}

impl Composition {
    pub fn weighted_share(&self, category: CompositionCategory) -> Option<f64> {
        self.weighted.map(|v| v[category.index()])
    }
}

/// Multipliers applied by one Monte Carlo iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    /// Scale on incidence and the prevalence targets.
    pub case_scale: f64,
    /// Scale on deaths, death rows and YLL.
    pub death_scale: f64,
    /// Scale on every cost card and death cost.
    pub cost_scale: f64,
}

impl Perturbation {
    pub const IDENTITY: Perturbation = Perturbation {
        case_scale: 1.0,
        death_scale: 1.0,
        cost_scale: 1.0,
    };
}

/// Inputs that stay fixed across iterations: the bundle, its cost cards,
/// YLL and the deterministic death split.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub bundle: ScenarioBundle,
    pub costs: CostCards,
    pub yll_by_sex: [f64; 2],
    pub deaths: DeathSplit,
}

pub fn prepare(bundle: &ScenarioBundle) -> ModelResult<PreparedModel> {
    Ok(PreparedModel {
        bundle: bundle.clone(),
        costs: build_cost_cards(bundle)?,
        yll_by_sex: compute_yll(&bundle.life_table),
        deaths: split_deaths(&bundle.epi)?,
    })
}

fn scaled_epi(epi: &EpiInputs, case_scale: f64) -> EpiInputs {
    let mut e = epi.clone();
    e.incidence *= case_scale;
    e.prevalence_1y *= case_scale;
    e.prevalence_3y = e.prevalence_3y.map(|v| v * case_scale);
    e.prevalence_5y *= case_scale;
    e
}

fn scaled_costs(costs: &CostCards, factor: f64) -> CostCards {
    if factor == 1.0 {
        costs.clone()
    } else {
        costs.scaled(factor)
    }
}

/// Runs epidemiology, health loss and aggregation under `p`.
pub fn evaluate(model: &PreparedModel, p: Perturbation) -> ModelResult<BurdenReport> {
    let bundle = &model.bundle;
    let shares = *bundle.shares();
    let mut epidemiology = run_epidemiology(
        &scaled_epi(&bundle.epi, p.case_scale),
        &bundle.stages,
        &bundle.survival,
    )?;
    epidemiology.deaths = if p.death_scale == 1.0 {
        model.deaths
    } else {
        model.deaths.scaled(p.death_scale)
    };
    let costs = scaled_costs(&model.costs, p.cost_scale);

    let mix = match bundle.prevalent_death_mix {
        Some(mix) => mix,
        None => prevalent_death_mix(
            DeathMixRule::ConditionalSurvival,
            &epidemiology.cases,
            &epidemiology.prevalence_by_year,
            &epidemiology.calibration,
            &bundle.survival,
        ),
    };

    let mut cells = Vec::with_capacity(24);
    let mut subtotals = [MoneyBySector::ZERO; 2];
    for cell in CellKey::all() {
        let card = costs.card(cell).total();
        for sex in Sex::ALL {
            let cases = epidemiology.cases.get(cell.population, cell.stage, sex);
            let cost = cell_burden(cases, &card, &shares);
            subtotals[cell.population.index()] += cost;
            cells.push(CellBurden {
                cell,
                sex,
                cases,
                cost,
            });
        }
    }
    let death_rows = death_burden(&epidemiology.deaths, &costs.deaths, &mix, &shares)?;
    let grand_total =
        subtotals[0] + subtotals[1] + death_rows[0].cost() + death_rows[1].cost();

    let yll = if p.death_scale == 1.0 {
        model.yll_by_sex
    } else {
        model.yll_by_sex.map(|v| v * p.death_scale)
    };
    let health = compute_daly(
        yll,
        compute_yld(&epidemiology.cases, &bundle.disability_weights)?,
    );

    let ratios = bundle.manifest.denominators.as_ref().map(|d| Ratios {
        share_of_health_expenditure: d
            .total_health_expenditure_usd
            .map(|v| grand_total.total() / v),
        share_of_gdp: d.gdp_usd.map(|v| grand_total.total() / v),
    });

    Ok(BurdenReport {
        cells,
        death_rows,
        subtotals,
        grand_total,
        ratios,
        health,
        prevalent_death_mix: mix,
        epidemiology,
        costs,
    })
}

/// Deterministic report for a bundle.
pub fn assemble_report(bundle: &ScenarioBundle) -> ModelResult<BurdenReport> {
    evaluate(&prepare(bundle)?, Perturbation::IDENTITY)
}

/// Column of a Table 2 row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Column {
    Men,
    Women,
    Total,
}

impl Column {
    pub const ALL: [Column; 3] = [Column::Men, Column::Women, Column::Total];

    pub fn as_str(self) -> &'static str {
        match self {
            Column::Men => "men",
            Column::Women => "women",
            Column::Total => "total",
        }
    }
}

/// Row of the main summary table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SummaryRow {
    Cell(CellKey),
    Deaths(Population),
    Subtotal(Population),
    GrandTotal,
}

impl SummaryRow {
    /// Rows in display order: each population's cells, its death row, its
    /// subtotal; then the grand total.
    pub fn all() -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for pop in Population::ALL {
            rows.extend(StageId::ALL.map(|st| SummaryRow::Cell(CellKey::new(pop, st))));
            rows.push(SummaryRow::Deaths(pop));
            rows.push(SummaryRow::Subtotal(pop));
        }
        rows.push(SummaryRow::GrandTotal);
        rows
    }

    pub fn key(self) -> String {
        match self {
            SummaryRow::Cell(c) => format!(
                "{}.{}.{}",
                c.population.as_str(),
                c.stage.cancer_type().as_str().to_lowercase(),
                c.stage.stage_token().to_lowercase()
            ),
            SummaryRow::Deaths(p) => format!("{}.deaths", p.as_str()),
            SummaryRow::Subtotal(p) => format!("{}.subtotal", p.as_str()),
            SummaryRow::GrandTotal => "total".into(),
        }
    }

    pub fn label(self) -> String {
        match self {
            SummaryRow::Cell(c) => c.stage.label().to_owned(),
            SummaryRow::Deaths(Population::Incident) => "Death".into(),
            SummaryRow::Deaths(Population::Prevalent) => {
                "Death after one year of diagnosis".into()
            }
            SummaryRow::Subtotal(_) => "Subtotal".into(),
            SummaryRow::GrandTotal => "Total cost of lung cancer".into(),
        }
    }
}

/// Count and weighted cost (USD) for one summary row and column. The grand
/// total has no count.
pub fn summary_value(report: &BurdenReport, row: SummaryRow, col: Column) -> (Option<f64>, f64) {
    let pick = |by_sex: [f64; 2]| match col {
        Column::Men => by_sex[0],
        Column::Women => by_sex[1],
        Column::Total => by_sex[0] + by_sex[1],
    };
    match row {
        SummaryRow::Cell(c) => {
            let m = report.cell(c, Sex::Male);
            let f = report.cell(c, Sex::Female);
            (
                Some(pick([m.cases, f.cases])),
                pick([m.cost.total(), f.cost.total()]),
            )
        }
        SummaryRow::Deaths(p) => {
            let r = report.death_row(p);
            (
                Some(pick(r.deaths_by_sex)),
                pick(r.cost_by_sex.map(|c| c.total())),
            )
        }
        SummaryRow::Subtotal(p) => {
            let cases = Sex::ALL.map(|s| report.epidemiology.cases.population_sex_total(p, s));
            let cost = match col {
                Column::Total => report.subtotal(p).total(),
                Column::Men => report.sex_subtotal(p, Sex::Male).total(),
                Column::Women => report.sex_subtotal(p, Sex::Female).total(),
            };
            (Some(pick(cases)), cost)
        }
        SummaryRow::GrandTotal => {
            let cost = match col {
                Column::Total => report.grand_total.total(),
                Column::Men => report.sex_total(Sex::Male).total(),
                Column::Women => report.sex_total(Sex::Female).total(),
            };
            (None, cost)
        }
    }
}

/// Named scalar outputs in a fixed order: every summary row and column
/// (count and cost), sector totals and DALYs.
pub fn metric_names() -> Vec<String> {
    let mut names = Vec::new();
    for row in SummaryRow::all() {
        for col in Column::ALL {
            if row != SummaryRow::GrandTotal {
                names.push(format!("{}.{}.n", row.key(), col.as_str()));
            }
            names.push(format!("{}.{}.cost", row.key(), col.as_str()));
        }
    }
    for s in Sector::ALL {
        names.push(format!("sector.{}.cost", s.as_str()));
    }
    names.push("daly.total".into());
    names
}

pub fn metric_values(report: &BurdenReport) -> Vec<f64> {
    let mut values = Vec::new();
    for row in SummaryRow::all() {
        for col in Column::ALL {
            let (n, cost) = summary_value(report, row, col);
            if let Some(n) = n {
                values.push(n);
            }
            values.push(cost);
        }
    }
    for s in Sector::ALL {
        values.push(report.sector_total(s));
    }
    values.push(report.health.daly());
    values
}
