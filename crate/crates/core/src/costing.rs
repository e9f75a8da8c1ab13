//! Per-patient annual cost cards and per-death costs.
//!
//! A card sums four parts for one (population, stage) cell: diagnosis-phase
//! resources, treatment and follow-up resources, drug acquisition and adverse
//! event management. Every part is tracked per sector and per composition
//! category; the card total is the sum of its categories.

use serde::Serialize;

use crate::bundle::{
    AdverseEventInputs, DeathCostInputs, ProfileRow, ScenarioBundle, UnitCostTable,
    PALLIATIVE_RESOURCE, WARD_RESOURCE,
};
use crate::error::{ModelError, ModelResult};
use crate::model::{
    CellKey, CellMap, CompositionCategory, MoneyBySector, Phase, RegimenClass, ResourceCategory,
    SectorShares, StageId,
};

const MIX_TOLERANCE: f64 = 1e-6;

pub fn weighted_unit_cost(values: &MoneyBySector, shares: &SectorShares) -> f64 {
    values.weighted(shares)
}

/// Money per composition category, indexed by [`CompositionCategory::index`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CategoryCosts {
    values: [MoneyBySector; 9],
}

impl CategoryCosts {
    pub fn get(&self, category: CompositionCategory) -> MoneyBySector {
        self.values[category.index()]
    }

    pub fn add(&mut self, category: CompositionCategory, amount: MoneyBySector) {
        self.values[category.index()] += amount;
    }

    pub fn total(&self) -> MoneyBySector {
        self.values
            .iter()
            .fold(MoneyBySector::ZERO, |acc, &v| acc + v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (CompositionCategory, MoneyBySector)> + '_ {
        CompositionCategory::ALL
            .into_iter()
            .map(|c| (c, self.values[c.index()]))
    }

    pub fn scaled(&self, factor: f64) -> CategoryCosts {
        CategoryCosts {
            values: self.values.map(|v| v * factor),
        }
    }

    fn merge(&mut self, other: &CategoryCosts) {
        for (a, b) in self.values.iter_mut().zip(other.values.iter()) {
            *a += *b;
        }
    }
}

/// Category a resource lands in for a given phase. Diagnostic tests ordered
/// during treatment count as follow-up.
pub fn composition_category(category: ResourceCategory, phase: Phase) -> CompositionCategory {
    match (phase, category) {
        (Phase::DiagnosisStaging, _) => CompositionCategory::Diagnosis,
        (Phase::TreatmentFollowup, ResourceCategory::Diagnosis) => {
            CompositionCategory::ConsultationLabFollowup
        }
        (Phase::TreatmentFollowup, c) => c.into(),
    }
}

/// Σ quantity × unit cost per sector, accumulated by category.
pub fn phase_resource_cost<'a>(
    rows: impl IntoIterator<Item = &'a ProfileRow>,
    unit_costs: &UnitCostTable,
) -> ModelResult<CategoryCosts> {
    let mut out = CategoryCosts::default();
    for row in rows {
        let unit = unit_costs
            .get(&row.resource)
            .ok_or_else(|| ModelError::UnresolvedResource(row.resource.clone()))?;
        out.add(
            composition_category(unit.category, row.phase),
            unit.cost * row.quantity,
        );
    }
    Ok(out)
}

/// Stage-average drug cost from named regimens: Σ cost / Σ share, which
/// extends the named regimens' average over the uncovered share.
pub fn extrapolate_drug_cost(regimens: &[(f64, f64)]) -> ModelResult<f64> {
    let covered: f64 = regimens.iter().map(|(share, _)| share).sum();
    if !(covered > 0.0 && covered <= 1.0 + MIX_TOLERANCE) {
        return Err(ModelError::InvalidCoveredShare(covered));
    }
    let cost: f64 = regimens.iter().map(|(_, cost)| cost).sum();
    Ok(cost / covered)
}

/// Expected adverse-event management cost per patient-year.
pub fn adverse_event_cost(
    class_mix: &[(RegimenClass, f64)],
    inputs: &AdverseEventInputs,
) -> ModelResult<MoneyBySector> {
    let sum: f64 = class_mix.iter().map(|(_, s)| s).sum();
    if (sum - 1.0).abs() > MIX_TOLERANCE {
        return Err(ModelError::MixNotNormalized {
            what: "regimen class mix".into(),
            sum,
        });
    }
    let mut total = MoneyBySector::ZERO;
    for &(class, share) in class_mix {
        for rate in inputs.rates.iter().filter(|r| r.class == class) {
            let cost = inputs
                .cost(&rate.event)
                .ok_or_else(|| ModelError::UnresolvedResource(rate.event.clone()))?;
            total += *cost * (share * rate.rate);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatientCostCard {
    pub cell: CellKey,
    pub categories: CategoryCosts,
}

impl PatientCostCard {
    pub fn total(&self) -> MoneyBySector {
        self.categories.total()
    }

    pub fn weighted(&self, shares: &SectorShares) -> f64 {
        self.total().weighted(shares)
    }

    pub fn scaled(&self, factor: f64) -> PatientCostCard {
        PatientCostCard {
            cell: self.cell,
            categories: self.categories.scaled(factor),
        }
    }
}

fn drug_cost(bundle: &ScenarioBundle, cell: CellKey) -> ModelResult<f64> {
    if let Some(cost) = bundle
        .drugs
        .entries
        .get(&cell)
        .and_then(|e| e.cost_per_patient_year)
    {
        return Ok(cost);
    }
    let regimens: Vec<(f64, f64)> = bundle
        .drugs
        .regimens_for(cell)
        .map(|r| (r.share_of_drug_cost, r.cost_per_patient_year))
        .collect();
    if regimens.is_empty() {
        return Err(ModelError::MissingDrugCost(cell));
    }
    extrapolate_drug_cost(&regimens)
}

pub fn annual_patient_cost(cell: CellKey, bundle: &ScenarioBundle) -> ModelResult<PatientCostCard> {
    let mut categories = CategoryCosts::default();
    for phase in [Phase::DiagnosisStaging, Phase::TreatmentFollowup] {
        let part = phase_resource_cost(bundle.profiles.rows_for(cell, phase), &bundle.unit_costs)?;
        categories.merge(&part);
    }
    categories.add(
        CompositionCategory::Drugs,
        MoneyBySector::uniform(drug_cost(bundle, cell)?),
    );
    let mix = bundle
        .adverse_events
        .class_mix
        .get(&cell)
        .map(Vec::as_slice)
        .unwrap_or(&[]);
    let ae = if mix.is_empty() {
        MoneyBySector::ZERO
    } else {
        adverse_event_cost(mix, &bundle.adverse_events)?
    };
    categories.add(CompositionCategory::AdverseEvents, ae);
    Ok(PatientCostCard { cell, categories })
}

fn unit(unit_costs: &UnitCostTable, resource: &str) -> ModelResult<MoneyBySector> {
    unit_costs
        .get(resource)
        .map(|u| u.cost)
        .ok_or_else(|| ModelError::UnresolvedResource(resource.to_owned()))
}

/// Ward days before death, priced per sector. The same for every stage.
pub fn incident_death_cost(
    inputs: &DeathCostInputs,
    unit_costs: &UnitCostTable,
) -> ModelResult<MoneyBySector> {
    Ok(unit(unit_costs, WARD_RESOURCE)? * inputs.incident_ward_days)
}

/// Override when the bundle supplies one for `stage`, otherwise part of a year
/// of treatment plus palliative care and ward days.
pub fn prevalent_death_cost(
    stage: StageId,
    annual_card: &PatientCostCard,
    inputs: &DeathCostInputs,
    unit_costs: &UnitCostTable,
) -> ModelResult<MoneyBySector> {
    if let Some(cost) = inputs.prevalent_overrides.get(&stage) {
        return Ok(*cost);
    }
    let f = &inputs.prevalent_formula;
    let mut cost = annual_card.total() * f.treatment_fraction;
    if f.palliative_units != 0.0 {
        cost += unit(unit_costs, PALLIATIVE_RESOURCE)? * f.palliative_units;
    }
    if f.ward_days != 0.0 {
        cost += unit(unit_costs, WARD_RESOURCE)? * f.ward_days;
    }
    Ok(cost)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeathCostCard {
    pub incident: MoneyBySector,
    /// Indexed by [`StageId::index`].
    pub prevalent: [MoneyBySector; 6],
}

impl DeathCostCard {
    pub fn prevalent(&self, stage: StageId) -> MoneyBySector {
        self.prevalent[stage.index()]
    }

    pub fn scaled(&self, factor: f64) -> DeathCostCard {
        DeathCostCard {
            incident: self.incident * factor,
            prevalent: self.prevalent.map(|v| v * factor),
        }
    }
}

/// Every cost input of the burden stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostCards {
    pub patients: CellMap<PatientCostCard>,
    pub deaths: DeathCostCard,
}

impl CostCards {
    pub fn card(&self, cell: CellKey) -> &PatientCostCard {
        self.patients.get(cell)
    }

    pub fn scaled(&self, factor: f64) -> CostCards {
        let mut patients = self.patients.clone();
        for cell in CellKey::all() {
            *patients.get_mut(cell) = self.patients.get(cell).scaled(factor);
        }
        CostCards {
            patients,
            deaths: self.deaths.scaled(factor),
        }
    }
}

pub fn build_cost_cards(bundle: &ScenarioBundle) -> ModelResult<CostCards> {
    let mut cards = Vec::with_capacity(12);
    for cell in CellKey::all() {
        cards.push(annual_patient_cost(cell, bundle)?);
    }
    let mut it = cards.into_iter();
    let patients = CellMap::from_fn(|_| it.next().expect("one card per cell"));
    let dc = &bundle.death_costs;
    let incident = incident_death_cost(dc, &bundle.unit_costs)?;
    let mut prevalent = [MoneyBySector::ZERO; 6];
    for stage in StageId::ALL {
        let card = patients.get(CellKey::new(crate::model::Population::Prevalent, stage));
        prevalent[stage.index()] = prevalent_death_cost(stage, card, dc, &bundle.unit_costs)?;
    }
    Ok(CostCards {
        patients,
        deaths: DeathCostCard {
            incident,
            prevalent,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{AeRate, PrevalentDeathFormula, UnitCost};
    use crate::model::Population;
    use std::collections::BTreeMap;

    const SHARES: SectorShares = SectorShares {
        public: 0.38,
        social_security: 0.46,
        private: 0.16,
    };

    fn units() -> UnitCostTable {
        UnitCostTable::new(vec![
            UnitCost {
                resource: "pulmonologist_consult".into(),
                category: ResourceCategory::ConsultationLabFollowup,
                cost: MoneyBySector::new(6.17, 9.69, 11.98),
            },
            UnitCost {
                resource: "lobectomy".into(),
                category: ResourceCategory::Surgery,
                cost: MoneyBySector::uniform(1_060.90),
            },
            UnitCost {
                resource: "chest_ct".into(),
                category: ResourceCategory::Diagnosis,
                cost: MoneyBySector::new(100.0, 120.0, 150.0),
            },
            UnitCost {
                resource: WARD_RESOURCE.into(),
                category: ResourceCategory::Hospitalization,
                cost: MoneyBySector::new(134.52, 237.16, 260.96),
            },
            UnitCost {
                resource: PALLIATIVE_RESOURCE.into(),
                category: ResourceCategory::Palliative,
                cost: MoneyBySector::uniform(91.70),
            },
        ])
    }

    fn row(phase: Phase, resource: &str, quantity: f64) -> ProfileRow {
        ProfileRow {
            cell: CellKey::new(Population::Incident, StageId::SclcLimited),
            phase,
            resource: resource.into(),
            quantity,
        }
    }

    #[test]
    fn weighting_matches_coverage_average() {
        let w = weighted_unit_cost(&MoneyBySector::new(6.17, 9.69, 11.98), &SHARES);
        assert!((w - 8.72).abs() < 0.005);
        let w = weighted_unit_cost(&MoneyBySector::new(134.52, 237.16, 260.96), &SHARES);
        assert!((w - 201.96).abs() < 0.005);
        assert!((weighted_unit_cost(&MoneyBySector::uniform(7.5), &SHARES) - 7.5).abs() < 1e-12);
    }

    #[test]
    fn resources_accumulate_by_category() {
        let rows = [
            row(Phase::TreatmentFollowup, "pulmonologist_consult", 3.0),
            row(Phase::TreatmentFollowup, "lobectomy", 0.10),
            row(Phase::DiagnosisStaging, "chest_ct", 1.0),
            row(Phase::TreatmentFollowup, "chest_ct", 2.0),
        ];
        let c = phase_resource_cost(&rows, &units()).unwrap();
        let consult = 3.0 * MoneyBySector::new(6.17, 9.69, 11.98).weighted(&SHARES);
        assert!((consult - 26.16).abs() < 0.01);
        assert!((c.get(CompositionCategory::Surgery).public - 106.09).abs() < 1e-9);
        assert_eq!(c.get(CompositionCategory::Diagnosis).public, 100.0);
        let follow = c.get(CompositionCategory::ConsultationLabFollowup);
        assert!((follow.public - (3.0 * 6.17 + 200.0)).abs() < 1e-9);
        assert_eq!(phase_resource_cost(&[], &units()).unwrap().total(), MoneyBySector::ZERO);
    }

    #[test]
    fn unresolved_resource_fails() {
        let err = phase_resource_cost(&[row(Phase::DiagnosisStaging, "x", 1.0)], &units()).unwrap_err();
        assert_eq!(err, ModelError::UnresolvedResource("x".into()));
    }

    #[test]
    fn drug_cost_extrapolates_over_covered_share() {
        let v = extrapolate_drug_cost(&[(0.25, 7_592.47), (0.12, 5_774.00)]).unwrap();
        assert!((v - 36_125.6).abs() < 0.01);
        assert!((v / (0.96 * 37_356.0) - 1.0).abs() < 0.01);
        let v = extrapolate_drug_cost(&[(0.65, 1_988.48), (0.32, 648.05)]).unwrap();
        assert_eq!(v.round(), 2_718.0);
        assert_eq!(extrapolate_drug_cost(&[(1.0, 42.0)]).unwrap(), 42.0);
        assert!(extrapolate_drug_cost(&[]).is_err());
        assert!(extrapolate_drug_cost(&[(0.8, 1.0), (0.4, 1.0)]).is_err());
    }

    fn ae_inputs() -> AdverseEventInputs {
        AdverseEventInputs {
            rates: vec![
                AeRate {
                    event: "pneumonitis".into(),
                    class: RegimenClass::Immunotherapy,
                    rate: 0.031,
                },
                AeRate {
                    event: "anemia".into(),
                    class: RegimenClass::Chemotherapy,
                    rate: 0.0685,
                },
            ],
            costs: vec![
                ("pneumonitis".into(), MoneyBySector::new(4_638.11, 5_502.74, 5_749.08)),
                ("anemia".into(), MoneyBySector::new(1_009.96, 1_587.95, 1_739.04)),
            ],
            class_mix: BTreeMap::new(),
        }
    }

    #[test]
    fn adverse_events_weight_rates_by_mix() {
        let inputs = ae_inputs();
        let c = adverse_event_cost(&[(RegimenClass::Immunotherapy, 1.0)], &inputs).unwrap();
        assert!((c.weighted(&SHARES) - 161.6).abs() < 0.05);
        let half = adverse_event_cost(
            &[(RegimenClass::Immunotherapy, 0.5), (RegimenClass::Untreated, 0.5)],
            &inputs,
        )
        .unwrap();
        assert!((half.public * 2.0 - c.public).abs() < 1e-9);
        let mut zero = inputs.clone();
        zero.rates.iter_mut().for_each(|r| r.rate = 0.0);
        assert_eq!(
            adverse_event_cost(&[(RegimenClass::Chemotherapy, 1.0)], &zero).unwrap(),
            MoneyBySector::ZERO
        );
        assert!(adverse_event_cost(&[(RegimenClass::Chemotherapy, 0.7)], &inputs).is_err());
    }

    fn death_inputs() -> DeathCostInputs {
        DeathCostInputs {
            incident_ward_days: 4.8,
            prevalent_formula: PrevalentDeathFormula {
                treatment_fraction: 0.5,
                palliative_units: 0.4,
                ward_days: 4.8,
            },
            prevalent_overrides: BTreeMap::new(),
        }
    }

    #[test]
    fn incident_death_is_ward_days() {
        let c = incident_death_cost(&death_inputs(), &units()).unwrap();
        assert!((c.public - 645.70).abs() < 0.01);
        assert!((c.weighted(&SHARES) - 969.4).abs() < 0.05);
        let mut none = death_inputs();
        none.incident_ward_days = 0.0;
        assert_eq!(incident_death_cost(&none, &units()).unwrap(), MoneyBySector::ZERO);
    }

    #[test]
    fn prevalent_death_prefers_override() {
        let mut card = PatientCostCard {
            cell: CellKey::new(Population::Prevalent, StageId::NsclcI),
            categories: CategoryCosts::default(),
        };
        card.categories
            .add(CompositionCategory::Drugs, MoneyBySector::uniform(11_102.0));
        let formula = prevalent_death_cost(StageId::NsclcI, &card, &death_inputs(), &units())
            .unwrap()
            .weighted(&SHARES);
        assert_eq!(formula.round(), 6_557.0);

        let mut with_override = death_inputs();
        let o = MoneyBySector::new(5_267.75, 6_021.30, 6_290.93);
        with_override.prevalent_overrides.insert(StageId::NsclcI, o);
        let c = prevalent_death_cost(StageId::NsclcI, &card, &with_override, &units()).unwrap();
        assert_eq!(c, o);
        assert!((c.weighted(&SHARES) - 5_778.10).abs() < 0.01);

        let mut zero = death_inputs();
        zero.prevalent_formula.palliative_units = 0.0;
        zero.prevalent_formula.ward_days = 0.0;
        card.categories = CategoryCosts::default();
        let c = prevalent_death_cost(StageId::NsclcI, &card, &zero, &UnitCostTable::default());
        assert_eq!(c.unwrap(), MoneyBySector::ZERO);
    }
}
