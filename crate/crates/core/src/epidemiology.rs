//! Incident and prevalent case matrices, prevalence calibration and the
//! split of deaths between incident and prevalent patients.
//!
//! Prevalence assumes a steady state: each of the five cohorts diagnosed
//! before the reference year had the current incidence. Cohort survivors are
//! rescaled by two factors, one for year 1 and one shared by years 2-5, so
//! that totals hit the 1-year and 5-year prevalence targets. Counts stay real
//! valued throughout.

use serde::Serialize;

use crate::bundle::{EpiInputs, StageDistribution, SurvivalTable};
use crate::error::{ModelError, ModelResult};
use crate::model::{CancerType, Population, Sex, StageId};

/// Case counts by (population, stage, sex).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseMatrix {
    counts: [[[f64; 2]; 6]; 2],
}

impl Default for CaseMatrix {
    fn default() -> Self {
        CaseMatrix {
            counts: [[[0.0; 2]; 6]; 2],
        }
    }
}

impl CaseMatrix {
    pub fn get(&self, population: Population, stage: StageId, sex: Sex) -> f64 {
        self.counts[population.index()][stage.index()][sex.index()]
    }

    pub fn set(&mut self, population: Population, stage: StageId, sex: Sex, value: f64) {
        self.counts[population.index()][stage.index()][sex.index()] = value;
    }

    /// Both sexes of one cell.
    pub fn cell(&self, population: Population, stage: StageId) -> f64 {
        Sex::ALL.iter().map(|&s| self.get(population, stage, s)).sum()
    }

    pub fn population_total(&self, population: Population) -> f64 {
        StageId::ALL
            .iter()
            .map(|&st| self.cell(population, st))
            .sum()
    }

    pub fn population_sex_total(&self, population: Population, sex: Sex) -> f64 {
        StageId::ALL
            .iter()
            .map(|&st| self.get(population, st, sex))
            .sum()
    }

    pub fn type_total(&self, population: Population, cancer_type: CancerType) -> f64 {
        cancer_type
            .stages()
            .iter()
            .map(|&st| self.cell(population, st))
            .sum()
    }

    pub fn total(&self) -> f64 {
        Population::ALL
            .iter()
            .map(|&p| self.population_total(p))
            .sum()
    }

    /// Copies the cells of `population` from `other`.
    pub fn merge_population(&mut self, other: &CaseMatrix, population: Population) {
        self.counts[population.index()] = other.counts[population.index()];
    }

    pub fn scaled(&self, factor: f64) -> CaseMatrix {
        let mut out = self.clone();
        for v in out.counts.iter_mut().flatten().flatten() {
            *v *= factor;
        }
        out
    }
}

/// Cohort survivors by stage, sex and year since diagnosis (1..=5).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrevalenceByYear {
    survivors: [[[f64; 5]; 2]; 6],
}

impl PrevalenceByYear {
    /// `year` is 1-based.
    pub fn get(&self, stage: StageId, sex: Sex, year: usize) -> f64 {
        self.survivors[stage.index()][sex.index()][year - 1]
    }

    pub fn year_total(&self, year: usize) -> f64 {
        StageId::ALL
            .iter()
            .flat_map(|&st| Sex::ALL.map(move |sx| (st, sx)))
            .map(|(st, sx)| self.get(st, sx, year))
            .sum()
    }

    pub fn stage_year(&self, stage: StageId, year: usize) -> f64 {
        Sex::ALL.iter().map(|&sx| self.get(stage, sx, year)).sum()
    }

    fn years_2_to_5(&self, stage: StageId, sex: Sex) -> f64 {
        (2..=5).map(|k| self.get(stage, sex, k)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationFactors {
    /// Scale on year-1 survivors.
    pub year1: f64,
    /// Scale on survivors 2 to 5 years after diagnosis.
    pub years_2_to_5: f64,
    /// Calibrated 3-year prevalence minus the 3-year target, when one is given.
    pub three_year_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeathSplit {
    pub incident: f64,
    pub prevalent: f64,
    pub incident_by_sex: [f64; 2],
    pub prevalent_by_sex: [f64; 2],
}

impl DeathSplit {
    pub fn total(&self) -> f64 {
        self.incident + self.prevalent
    }

    pub fn get(&self, population: Population, sex: Sex) -> f64 {
        match population {
            Population::Incident => self.incident_by_sex[sex.index()],
            Population::Prevalent => self.prevalent_by_sex[sex.index()],
        }
    }

    pub fn population(&self, population: Population) -> f64 {
        match population {
            Population::Incident => self.incident,
            Population::Prevalent => self.prevalent,
        }
    }

    pub fn scaled(&self, factor: f64) -> DeathSplit {
        DeathSplit {
            incident: self.incident * factor,
            prevalent: self.prevalent * factor,
            incident_by_sex: self.incident_by_sex.map(|v| v * factor),
            prevalent_by_sex: self.prevalent_by_sex.map(|v| v * factor),
        }
    }
}

/// Annual incident cases implied by deaths and the mortality-to-incidence ratio.
pub fn incidence_from_mortality(deaths: f64, mi_ratio: f64) -> ModelResult<f64> {
    if !(mi_ratio > 0.0) {
        return Err(ModelError::NonPositiveRatio(mi_ratio));
    }
    Ok(deaths / mi_ratio)
}

/// Splits `total` incident cases over type, stage and sex.
pub fn decompose_cases(total: f64, stages: &StageDistribution, male_fraction: f64) -> CaseMatrix {
    let mut m = CaseMatrix::default();
    for stage in StageId::ALL {
        let cell = total * stages.type_share(stage) * stages.stage_share(stage);
        for sex in Sex::ALL {
            m.set(Population::Incident, stage, sex, cell * sex.share(male_fraction));
        }
    }
    m
}

/// Survivors of identical incident cohorts after 1..5 years. `survival_multiplier`
/// scales S per sex (capped at 1); pass `[1.0, 1.0]` for sex-neutral survival.
pub fn roll_forward(
    incident: &CaseMatrix,
    survival: &SurvivalTable,
    survival_multiplier: [f64; 2],
) -> PrevalenceByYear {
    let mut survivors = [[[0.0; 5]; 2]; 6];
    for stage in StageId::ALL {
        for sex in Sex::ALL {
            let cohort = incident.get(Population::Incident, stage, sex);
            let mult = survival_multiplier[sex.index()];
            for (k, slot) in survivors[stage.index()][sex.index()].iter_mut().enumerate() {
                let s = survival.get(stage, k + 1);
                let p = if mult == 1.0 { s } else { (s * mult).min(1.0) };
                *slot = cohort * p;
            }
        }
    }
    PrevalenceByYear { survivors }
}

fn factor(target: f64, raw: f64, window: &'static str) -> ModelResult<f64> {
    if raw > 0.0 {
        Ok(target / raw)
    } else if target == 0.0 {
        Ok(1.0)
    } else {
        Err(ModelError::ZeroRawPrevalence { window, target })
    }
}

/// Rescales cohort survivors so the prevalent slice totals the 5-year target
/// and year-1 survivors total the 1-year target.
pub fn calibrate_prevalence(
    raw: &PrevalenceByYear,
    targets: &EpiInputs,
) -> ModelResult<(CaseMatrix, CalibrationFactors)> {
    let raw_year1 = raw.year_total(1);
    let raw_later: f64 = (2..=5).map(|k| raw.year_total(k)).sum();
    let year1 = factor(targets.prevalence_1y, raw_year1, "year 1")?;
    let years_2_to_5 = factor(
        targets.prevalence_5y - targets.prevalence_1y,
        raw_later,
        "years 2-5",
    )?;

    let mut m = CaseMatrix::default();
    for stage in StageId::ALL {
        for sex in Sex::ALL {
            let v = year1 * raw.get(stage, sex, 1) + years_2_to_5 * raw.years_2_to_5(stage, sex);
            m.set(Population::Prevalent, stage, sex, v);
        }
    }
    let three_year_residual = targets.prevalence_3y.map(|target| {
        year1 * raw_year1 + years_2_to_5 * (raw.year_total(2) + raw.year_total(3)) - target
    });
    Ok((
        m,
        CalibrationFactors {
            year1,
            years_2_to_5,
            three_year_residual,
        },
    ))
}

/// Deaths among incident cases are those not reaching one year; the rest
/// occur among prevalent cases.
pub fn split_deaths(epi: &EpiInputs) -> ModelResult<DeathSplit> {
    if epi.prevalence_1y > epi.incidence {
        return Err(ModelError::PrevalenceExceedsIncidence {
            prevalence_1y: epi.prevalence_1y,
            incidence: epi.incidence,
        });
    }
    let incident = epi.incidence - epi.prevalence_1y;
    let prevalent = epi.deaths - incident;
    if prevalent < 0.0 {
        return Err(ModelError::NegativePrevalentDeaths(prevalent));
    }
    let inc_male = epi.sex_split_incident;
    let prev_male = epi.prevalent_death_male_fraction();
    Ok(DeathSplit {
        incident,
        prevalent,
        incident_by_sex: Sex::ALL.map(|s| incident * s.share(inc_male)),
        prevalent_by_sex: Sex::ALL.map(|s| prevalent * s.share(prev_male)),
    })
}

/// How prevalent deaths are spread over stages when the bundle gives no mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeathMixRule {
    /// Calibrated survivors in each year since diagnosis times the probability
    /// of dying before the next year (year 5 reuses the year 4→5 ratio).
    ConditionalSurvival,
    /// Incident cohort times its five-year cumulative mortality, 1 − S(5).
    CohortMortality,
}

/// Share of prevalent deaths per stage, indexed by [`StageId::index`].
pub fn prevalent_death_mix(
    rule: DeathMixRule,
    incident: &CaseMatrix,
    raw: &PrevalenceByYear,
    factors: &CalibrationFactors,
    survival: &SurvivalTable,
) -> [f64; 6] {
    let mut weights = [0.0; 6];
    for stage in StageId::ALL {
        let s = survival.row(stage);
        weights[stage.index()] = match rule {
            DeathMixRule::ConditionalSurvival => (1..=5)
                .map(|k| {
                    let (from, to) = if k < 5 { (s[k - 1], s[k]) } else { (s[3], s[4]) };
                    let cond = if from > 0.0 { to / from } else { 0.0 };
                    let f = if k == 1 {
                        factors.year1
                    } else {
                        factors.years_2_to_5
                    };
                    f * raw.stage_year(stage, k) * (1.0 - cond)
                })
                .sum(),
            DeathMixRule::CohortMortality => {
                incident.cell(Population::Incident, stage) * (1.0 - s[4])
            }
        };
    }
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.map(|w| w / total)
    } else {
        [1.0 / 6.0; 6]
    }
}

/// Everything the epidemiological stage produces for one set of inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Epidemiology {
    pub cases: CaseMatrix,
    pub prevalence_by_year: PrevalenceByYear,
    pub calibration: CalibrationFactors,
    pub deaths: DeathSplit,
}

/// Runs decomposition, roll-forward, calibration and the death split.
pub fn run_epidemiology(
    epi: &EpiInputs,
    stages: &StageDistribution,
    survival: &SurvivalTable,
) -> ModelResult<Epidemiology> {
    let mut cases = decompose_cases(epi.incidence, stages, epi.sex_split_incident);
    let prevalence_by_year = roll_forward(&cases, survival, epi.survival_multiplier);
    let (prevalent, calibration) = calibrate_prevalence(&prevalence_by_year, epi)?;
    cases.merge_population(&prevalent, Population::Prevalent);
    let deaths = split_deaths(epi)?;
    Ok(Epidemiology {
        cases,
        prevalence_by_year,
        calibration,
        deaths,
    })
}
