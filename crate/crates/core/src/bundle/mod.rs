//! Scenario input bundle: every input table of the model, its loader,
//! writer and validator.
//!
//! A bundle is a directory holding `manifest.toml` plus fixed-header CSV
//! tables. All money is held in USD once loaded; tables whose rows carry
//! `currency = ARS` are divided by the manifest exchange rate at load time.

mod load;
mod validate;
mod write;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{
    CellKey, MoneyBySector, Phase, Population, RegimenClass, ResourceCategory, SectorShares, Sex,
    StageClass, StageId,
};

pub use load::load_bundle;
pub use validate::{validate_bundle, Issue, Severity, ValidationReport};
pub use write::write_bundle;

/// Resource id of the general ward day, used by the death-cost formulas.
pub const WARD_RESOURCE: &str = "general_ward";
/// Resource id of one palliative-care unit.
pub const PALLIATIVE_RESOURCE: &str = "palliative_care";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub scenario_name: String,
    pub reference_year: i32,
    /// ARS per USD.
    pub exchange_rate: f64,
    pub sector_shares: SectorShares,
    #[serde(rename = "monte_carlo")]
    pub mc_defaults: McDefaults,
    #[serde(default)]
    pub uncertainty: UncertaintyRanges,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominators: Option<Denominators>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub provenance_notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDefaults {
    pub iterations: usize,
    pub seed: u64,
    pub percentiles: (f64, f64),
}

/// Half-widths of the 95% ranges of the three uncertain parameters.
/// Deaths and cost are relative to the central value; the m:i ratio is absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyRanges {
    pub deaths_halfwidth: f64,
    pub cost_halfwidth: f64,
    pub mi_ratio_halfwidth: f64,
}

impl Default for UncertaintyRanges {
    fn default() -> Self {
        UncertaintyRanges {
            deaths_halfwidth: 0.13,
            cost_halfwidth: 0.25,
            mi_ratio_halfwidth: 0.06,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Denominators {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gdp_usd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_health_expenditure_usd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiInputs {
    pub incidence: f64,
    pub prevalence_1y: f64,
    pub prevalence_3y: Option<f64>,
    pub prevalence_5y: f64,
    pub deaths: f64,
    pub mi_ratio: f64,
    /// Male fraction of incident cases (and of incident deaths).
    pub sex_split_incident: f64,
    /// Male fraction of deaths among prevalent cases; defaults to the incident split.
    pub sex_split_prevalent_deaths: Option<f64>,
    /// Multiplier on survival probabilities per sex, indexed by [`Sex::index`].
    pub survival_multiplier: [f64; 2],
}

impl EpiInputs {
    pub fn prevalent_death_male_fraction(&self) -> f64 {
        self.sex_split_prevalent_deaths
            .unwrap_or(self.sex_split_incident)
    }

    pub fn survival_multiplier(&self, sex: Sex) -> f64 {
        self.survival_multiplier[sex.index()]
    }
}

/// Incident case distribution: cancer type shares and, within each type, stage shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDistribution {
    /// Indexed by [`crate::model::CancerType::index`].
    pub type_shares: [f64; 2],
    /// Share of each stage within its cancer type, indexed by [`StageId::index`].
    pub stage_shares: [f64; 6],
}

impl StageDistribution {
    pub fn stage_share(&self, stage: StageId) -> f64 {
        self.stage_shares[stage.index()]
    }

    pub fn type_share(&self, stage: StageId) -> f64 {
        self.type_shares[stage.cancer_type().index()]
    }
}

/// Cumulative survival S(stage, k) for k = 1..=5 years since diagnosis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalTable {
    pub probabilities: [[f64; 5]; 6],
}

impl SurvivalTable {
    pub const YEARS: usize = 5;

    /// `year` is 1-based.
    pub fn get(&self, stage: StageId, year: usize) -> f64 {
        self.probabilities[stage.index()][year - 1]
    }

    pub fn row(&self, stage: StageId) -> &[f64; 5] {
        &self.probabilities[stage.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeTableRow {
    pub sex: Sex,
    pub age_group: String,
    pub deaths: f64,
    pub life_expectancy: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LifeTableDeaths {
    pub rows: Vec<LifeTableRow>,
}

impl LifeTableDeaths {
    pub fn deaths(&self, sex: Sex) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.sex == sex)
            .map(|r| r.deaths)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DisabilityWeights {
    /// `[population][stage_class]`; `None` when the key is absent.
    pub weights: [[Option<f64>; 2]; 2],
}

impl DisabilityWeights {
    pub fn new(
        incident_localized: f64,
        incident_metastatic: f64,
        prevalent_localized: f64,
        prevalent_metastatic: f64,
    ) -> Self {
        DisabilityWeights {
            weights: [
                [Some(incident_localized), Some(incident_metastatic)],
                [Some(prevalent_localized), Some(prevalent_metastatic)],
            ],
        }
    }

    pub fn get(&self, population: Population, class: StageClass) -> Option<f64> {
        self.weights[population.index()][class.index()]
    }

    pub fn set(&mut self, population: Population, class: StageClass, weight: f64) {
        self.weights[population.index()][class.index()] = Some(weight);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCost {
    pub resource: String,
    pub category: ResourceCategory,
    pub cost: MoneyBySector,
}

/// Unit costs keyed by resource id, kept in file order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UnitCostTable {
    rows: Vec<UnitCost>,
    index: BTreeMap<String, usize>,
}

impl UnitCostTable {
    pub fn new(rows: Vec<UnitCost>) -> Self {
        let mut table = UnitCostTable::default();
        for row in rows {
            table.insert(row);
        }
        table
    }

    /// Inserts or replaces a row.
    pub fn insert(&mut self, row: UnitCost) {
        match self.index.get(&row.resource) {
            Some(&i) => self.rows[i] = row,
            None => {
                self.index.insert(row.resource.clone(), self.rows.len());
                self.rows.push(row);
            }
        }
    }

    pub fn get(&self, resource: &str) -> Option<&UnitCost> {
        self.index.get(resource).map(|&i| &self.rows[i])
    }

    pub fn get_mut(&mut self, resource: &str) -> Option<&mut UnitCost> {
        self.index.get(resource).map(|&i| &mut self.rows[i])
    }

    pub fn rows(&self) -> &[UnitCost] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> impl Iterator<Item = &mut UnitCost> {
        self.rows.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub cell: CellKey,
    pub phase: Phase,
    pub resource: String,
    pub quantity: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResourceProfile {
    pub rows: Vec<ProfileRow>,
}

impl ResourceProfile {
    pub fn rows_for(&self, cell: CellKey, phase: Phase) -> impl Iterator<Item = &ProfileRow> {
        self.rows
            .iter()
            .filter(move |r| r.cell == cell && r.phase == phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrugCostEntry {
    /// Sector-invariant drug acquisition cost per patient-year, USD.
    pub cost_per_patient_year: Option<f64>,
    /// Published share of drugs in the annual cost, informational.
    pub drug_share_of_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimenRow {
    pub cell: CellKey,
    pub regimen: String,
    pub share_of_drug_cost: f64,
    pub cost_per_patient_year: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DrugCostInputs {
    pub entries: BTreeMap<CellKey, DrugCostEntry>,
    pub regimens: Vec<RegimenRow>,
}

impl DrugCostInputs {
    pub fn regimens_for(&self, cell: CellKey) -> impl Iterator<Item = &RegimenRow> {
        self.regimens.iter().filter(move |r| r.cell == cell)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeRate {
    pub event: String,
    pub class: RegimenClass,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AdverseEventInputs {
    pub rates: Vec<AeRate>,
    /// Management cost per event, in file order.
    pub costs: Vec<(String, MoneyBySector)>,
    pub class_mix: BTreeMap<CellKey, Vec<(RegimenClass, f64)>>,
}

impl AdverseEventInputs {
    pub fn cost(&self, event: &str) -> Option<&MoneyBySector> {
        self.costs.iter().find(|(e, _)| e == event).map(|(_, c)| c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalentDeathFormula {
    pub treatment_fraction: f64,
    pub palliative_units: f64,
    pub ward_days: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeathCostInputs {
    pub incident_ward_days: f64,
    pub prevalent_formula: PrevalentDeathFormula,
    pub prevalent_overrides: BTreeMap<StageId, MoneyBySector>,
}

/// Every input of one scenario, USD-normalized and cross-referenced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBundle {
    pub manifest: ScenarioManifest,
    pub epi: EpiInputs,
    pub stages: StageDistribution,
    pub survival: SurvivalTable,
    pub life_table: LifeTableDeaths,
    pub disability_weights: DisabilityWeights,
    pub unit_costs: UnitCostTable,
    pub profiles: ResourceProfile,
    pub drugs: DrugCostInputs,
    pub adverse_events: AdverseEventInputs,
    pub death_costs: DeathCostInputs,
    /// Share of prevalent deaths per stage; derived from survival when absent.
    pub prevalent_death_mix: Option<[f64; 6]>,
    /// Non-fatal adjustments made while loading (e.g. renormalized shares).
    #[serde(default)]
    pub load_notes: Vec<String>,
}

impl ScenarioBundle {
    pub fn shares(&self) -> &SectorShares {
        &self.manifest.sector_shares
    }
}
