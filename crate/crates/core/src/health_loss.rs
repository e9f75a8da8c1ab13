//! Years of life lost, years lived with disability and DALYs.

use serde::Serialize;

use crate::bundle::{DisabilityWeights, LifeTableDeaths};
use crate::epidemiology::CaseMatrix;
use crate::error::{ModelError, ModelResult};
use crate::model::{Population, Sex, StageId};

/// YLL per sex, indexed by [`Sex::index`]: deaths × remaining life expectancy.
pub fn compute_yll(life_table: &LifeTableDeaths) -> [f64; 2] {
    let mut yll = [0.0; 2];
    for row in &life_table.rows {
        yll[row.sex.index()] += row.deaths * row.life_expectancy;
    }
    yll
}

/// YLD for every (population, stage, sex) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YldBreakdown {
    cells: [[[f64; 2]; 6]; 2],
}

impl YldBreakdown {
    pub fn get(&self, population: Population, stage: StageId, sex: Sex) -> f64 {
        self.cells[population.index()][stage.index()][sex.index()]
    }

    pub fn by_sex(&self) -> [f64; 2] {
        let mut out = [0.0; 2];
        for pop in &self.cells {
            for stage in pop {
                out[0] += stage[0];
                out[1] += stage[1];
            }
        }
        out
    }
}

pub fn compute_yld(cases: &CaseMatrix, weights: &DisabilityWeights) -> ModelResult<YldBreakdown> {
    let mut cells = [[[0.0; 2]; 6]; 2];
    for pop in Population::ALL {
        for stage in StageId::ALL {
            let class = stage.stage_class();
            let dw = weights
                .get(pop, class)
                .ok_or(ModelError::MissingWeight(pop, class))?;
            for sex in Sex::ALL {
                cells[pop.index()][stage.index()][sex.index()] = cases.get(pop, stage, sex) * dw;
            }
        }
    }
    Ok(YldBreakdown { cells })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HealthLossSummary {
    pub yll_by_sex: [f64; 2],
    pub yld_by_sex: [f64; 2],
    pub daly_by_sex: [f64; 2],
    pub yld_cells: YldBreakdown,
}

impl HealthLossSummary {
    pub fn yll(&self) -> f64 {
        self.yll_by_sex[0] + self.yll_by_sex[1]
    }

    pub fn yld(&self) -> f64 {
        self.yld_by_sex[0] + self.yld_by_sex[1]
    }

    pub fn daly(&self) -> f64 {
        self.yll() + self.yld()
    }

    /// Copy with YLL, YLD and DALY multiplied by separate factors applied to
    /// deaths and cases respectively.
    pub fn scaled(&self, death_factor: f64, case_factor: f64) -> HealthLossSummary {
        let mut yld_cells = self.yld_cells.clone();
        for v in yld_cells.cells.iter_mut().flatten().flatten() {
            *v *= case_factor;
        }
        compute_daly(self.yll_by_sex.map(|v| v * death_factor), yld_cells)
    }
}

pub fn compute_daly(yll_by_sex: [f64; 2], yld: YldBreakdown) -> HealthLossSummary {
    let yld_by_sex = yld.by_sex();
    HealthLossSummary {
        yll_by_sex,
        yld_by_sex,
        daly_by_sex: [yll_by_sex[0] + yld_by_sex[0], yll_by_sex[1] + yld_by_sex[1]],
        yld_cells: yld,
    }
}
