use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use csv::StringRecord;

use super::{
    AdverseEventInputs, AeRate, DeathCostInputs, DisabilityWeights, DrugCostEntry,
    DrugCostInputs, EpiInputs, LifeTableDeaths, LifeTableRow, PrevalentDeathFormula, ProfileRow,
    RegimenRow, ResourceProfile, ScenarioBundle, ScenarioManifest, StageDistribution,
    SurvivalTable, UnitCost, UnitCostTable,
};
use crate::error::BundleError;
use crate::model::{
    CancerType, CellKey, MoneyBySector, Phase, Population, RegimenClass, ResourceCategory, Sex,
    StageClass, StageId,
};

/// Shares off by at most this much are renormalized with a note.
pub(crate) const RENORMALIZE_TOLERANCE: f64 = 1e-4;
pub(crate) const SHARE_TOLERANCE: f64 = 1e-9;

type Result<T> = std::result::Result<T, BundleError>;

/// Reads, parses and currency-normalizes the bundle stored in `path`.
pub fn load_bundle(path: impl AsRef<Path>) -> Result<ScenarioBundle> {
    let dir = path.as_ref();
    if !dir.is_dir() {
        return Err(BundleError::MissingDirectory(dir.to_path_buf()));
    }
    let mut notes = Vec::new();

    let manifest = load_manifest(dir)?;
    let rate = manifest.exchange_rate;
    if !(rate > 0.0) {
        return Err(BundleError::Manifest(format!(
            "exchange_rate must be positive, got {rate}"
        )));
    }
    let mut manifest = manifest;
    let shares = &mut manifest.sector_shares;
    let mut sector = [shares.public, shares.social_security, shares.private];
    renormalize(&mut sector, "sector shares", &mut notes);
    *shares = crate::model::SectorShares {
        public: sector[0],
        social_security: sector[1],
        private: sector[2],
    };

    let epi = parse_epi(&Table::read(dir, "epi.csv", &["parameter", "value"])?)?;
    let stages = parse_stages(
        &Table::read(dir, "stage_distribution.csv", &["population", "type", "stage", "share"])?,
        &mut notes,
    )?;
    let survival = parse_survival(&Table::read(
        dir,
        "survival.csv",
        &["type", "stage", "year", "probability"],
    )?)?;
    let life_table = parse_life_table(&Table::read(
        dir,
        "life_table.csv",
        &["sex", "age_group", "deaths", "life_expectancy"],
    )?)?;
    let disability_weights = parse_weights(&Table::read(
        dir,
        "disability_weights.csv",
        &["population", "stage_class", "weight"],
    )?)?;
    let unit_costs = parse_unit_costs(
        &Table::read(
            dir,
            "unit_costs.csv",
            &["resource", "category", "public", "social", "private", "currency"],
        )?,
        rate,
    )?;
    let profiles = parse_profiles(
        &Table::read(
            dir,
            "resource_profiles.csv",
            &["population", "type", "stage", "phase", "resource", "quantity"],
        )?,
        &unit_costs,
    )?;
    let mut drugs = parse_drug_costs(
        &Table::read(
            dir,
            "drug_costs.csv",
            &["population", "type", "stage", "cost_per_patient_year", "drug_share_of_total"],
        )?,
        rate,
    )?;
    if let Some(t) = Table::read_optional(
        dir,
        "regimens.csv",
        &[
            "population",
            "type",
            "stage",
            "regimen",
            "share_of_drug_cost",
            "cost_per_patient_year",
        ],
    )? {
        drugs.regimens = parse_regimens(&t, rate)?;
    }
    let adverse_events = AdverseEventInputs {
        rates: parse_ae_rates(&Table::read(
            dir,
            "ae_rates.csv",
            &["event", "regimen_class", "rate"],
        )?)?,
        costs: parse_ae_costs(
            &Table::read(dir, "ae_costs.csv", &["event", "public", "social", "private"])?,
            rate,
        )?,
        class_mix: parse_class_mix(
            &Table::read(
                dir,
                "class_mix.csv",
                &["population", "type", "stage", "regimen_class", "share"],
            )?,
            &mut notes,
        )?,
    };
    let mut death_costs =
        parse_death_costs(&Table::read(dir, "death_costs.csv", &["parameter", "value"])?)?;
    if let Some(t) = Table::read_optional(
        dir,
        "death_cost_overrides.csv",
        &["type", "stage", "public", "social", "private"],
    )? {
        death_costs.prevalent_overrides = parse_overrides(&t, rate)?;
    }
    let prevalent_death_mix = match Table::read_optional(
        dir,
        "prevalent_death_mix.csv",
        &["type", "stage", "share"],
    )? {
        Some(t) => Some(parse_death_mix(&t, &mut notes)?),
        None => None,
    };

    Ok(ScenarioBundle {
        manifest,
        epi,
        stages,
        survival,
        life_table,
        disability_weights,
        unit_costs,
        profiles,
        drugs,
        adverse_events,
        death_costs,
        prevalent_death_mix,
        load_notes: notes,
    })
}

fn load_manifest(dir: &Path) -> Result<ScenarioManifest> {
    let path = dir.join("manifest.toml");
    if !path.is_file() {
        return Err(BundleError::MissingTable("manifest.toml"));
    }
    let text = fs::read_to_string(&path).map_err(|source| BundleError::Io {
        path: path.clone(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| BundleError::Manifest(e.to_string()))
}

/// Rescales `values` to sum to one when they are off by no more than
/// [`RENORMALIZE_TOLERANCE`]. Larger deviations are left for the validator.
fn renormalize(values: &mut [f64], what: &str, notes: &mut Vec<String>) {
    let sum: f64 = values.iter().sum();
    let off = (sum - 1.0).abs();
    if off > SHARE_TOLERANCE && off <= RENORMALIZE_TOLERANCE {
        for v in values.iter_mut() {
            *v /= sum;
        }
        notes.push(format!("{what} summed to {sum}; renormalized to 1"));
    }
}

struct Table {
    file: &'static str,
    headers: Vec<String>,
    rows: Vec<(u64, StringRecord)>,
}

impl Table {
    fn read(dir: &Path, file: &'static str, required: &[&'static str]) -> Result<Table> {
        Table::read_optional(dir, file, required)?.ok_or(BundleError::MissingTable(file))
    }

    fn read_optional(
        dir: &Path,
        file: &'static str,
        required: &[&'static str],
    ) -> Result<Option<Table>> {
        let path = dir.join(file);
        if !path.is_file() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|source| BundleError::Io {
            path: path.clone(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| csv_error(file, e))?
            .iter()
            .map(str::to_owned)
            .collect();
        if required.iter().any(|c| !headers.iter().any(|h| h == c)) {
            return Err(BundleError::Header {
                file: file.to_owned(),
                found: headers,
                expected: required.to_vec(),
            });
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(file, e))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            rows.push((line, record));
        }
        Ok(Some(Table {
            file,
            headers,
            rows,
        }))
    }

    fn has(&self, column: &str) -> bool {
        self.headers.iter().any(|h| h == column)
    }

    fn field<'r>(&self, row: &'r (u64, StringRecord), column: &str) -> &'r str {
        let idx = self
            .headers
            .iter()
            .position(|h| h == column)
            .expect("required column checked at read time");
        row.1.get(idx).unwrap_or("")
    }

    fn parse_err(&self, line: u64, column: &str, message: impl Into<String>) -> BundleError {
        BundleError::Parse {
            file: self.file.to_owned(),
            line,
            column: column.to_owned(),
            message: message.into(),
        }
    }

    fn unknown(&self, line: u64, column: &str, token: &str) -> BundleError {
        BundleError::UnknownToken {
            file: self.file.to_owned(),
            line,
            column: column.to_owned(),
            token: token.to_owned(),
        }
    }

    fn table_err(&self, message: impl Into<String>) -> BundleError {
        BundleError::Table {
            file: self.file.to_owned(),
            message: message.into(),
        }
    }

    fn number(&self, row: &(u64, StringRecord), column: &str) -> Result<f64> {
        parse_number(self.field(row, column)).map_err(|m| self.parse_err(row.0, column, m))
    }

    fn optional_number(&self, row: &(u64, StringRecord), column: &str) -> Result<Option<f64>> {
        if !self.has(column) || self.field(row, column).is_empty() {
            return Ok(None);
        }
        self.number(row, column).map(Some)
    }

    fn population(&self, row: &(u64, StringRecord)) -> Result<Population> {
        let token = self.field(row, "population");
        Population::parse(token).ok_or_else(|| self.unknown(row.0, "population", token))
    }

    fn stage(&self, row: &(u64, StringRecord)) -> Result<StageId> {
        let ty = self.field(row, "type");
        let cancer_type = CancerType::parse(ty).ok_or_else(|| self.unknown(row.0, "type", ty))?;
        let stage = self.field(row, "stage");
        StageId::from_parts(cancer_type, stage).ok_or_else(|| self.unknown(row.0, "stage", stage))
    }

    fn cell(&self, row: &(u64, StringRecord)) -> Result<CellKey> {
        Ok(CellKey::new(self.population(row)?, self.stage(row)?))
    }

    /// Multiplier converting this row's money fields to USD.
    fn currency_factor(&self, row: &(u64, StringRecord), exchange_rate: f64) -> Result<f64> {
        if !self.has("currency") {
            return Ok(1.0);
        }
        match self.field(row, "currency").to_ascii_uppercase().as_str() {
            "USD" => Ok(1.0),
            "ARS" => Ok(1.0 / exchange_rate),
            "" => Err(BundleError::MissingCurrency {
                file: self.file.to_owned(),
                line: row.0,
            }),
            _ => Err(self.unknown(row.0, "currency", self.field(row, "currency"))),
        }
    }

    fn money(&self, row: &(u64, StringRecord), exchange_rate: f64) -> Result<MoneyBySector> {
        let factor = self.currency_factor(row, exchange_rate)?;
        Ok(MoneyBySector::new(
            self.number(row, "public")? * factor,
            self.number(row, "social")? * factor,
            self.number(row, "private")? * factor,
        ))
    }
}

fn csv_error(file: &str, e: csv::Error) -> BundleError {
    let line = e.position().map_or(0, |p| p.line());
    BundleError::Parse {
        file: file.to_owned(),
        line,
        column: String::new(),
        message: e.to_string(),
    }
}

/// Dot-decimal number. Percent signs and thousands separators are rejected.
pub(crate) fn parse_number(raw: &str) -> std::result::Result<f64, String> {
    let s = raw.trim();
    if s.is_empty() {
        return Err("empty value".into());
    }
    if s.contains('%') {
        return Err(format!("{s:?}: percent signs are not accepted, write fractions"));
    }
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if !v.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(v)
}

fn parse_epi(t: &Table) -> Result<EpiInputs> {
    let mut values = BTreeMap::new();
    for row in &t.rows {
        let key = t.field(row, "parameter");
        match key {
            "incidence"
            | "prevalence_1y"
            | "prevalence_3y"
            | "prevalence_5y"
            | "deaths"
            | "mi_ratio"
            | "sex_split_incident"
            | "sex_split_prevalent_deaths"
            | "survival_multiplier_male"
            | "survival_multiplier_female" => {
                values.insert(key, t.number(row, "value")?);
            }
            other => return Err(t.unknown(row.0, "parameter", other)),
        }
    }
    let required = |k: &str| {
        values
            .get(k)
            .copied()
            .ok_or_else(|| t.table_err(format!("missing parameter {k}")))
    };
    Ok(EpiInputs {
        incidence: required("incidence")?,
        prevalence_1y: required("prevalence_1y")?,
        prevalence_3y: values.get("prevalence_3y").copied(),
        prevalence_5y: required("prevalence_5y")?,
        deaths: required("deaths")?,
        mi_ratio: required("mi_ratio")?,
        sex_split_incident: required("sex_split_incident")?,
        sex_split_prevalent_deaths: values.get("sex_split_prevalent_deaths").copied(),
        survival_multiplier: [
            values.get("survival_multiplier_male").copied().unwrap_or(1.0),
            values.get("survival_multiplier_female").copied().unwrap_or(1.0),
        ],
    })
}

fn parse_stages(t: &Table, notes: &mut Vec<String>) -> Result<StageDistribution> {
    let mut type_shares = [0.0; 2];
    let mut stage_shares = [0.0; 6];
    for row in &t.rows {
        let population = t.population(row)?;
        if population != Population::Incident {
            return Err(t.parse_err(
                row.0,
                "population",
                "stage distribution is defined for incident cases only",
            ));
        }
        let share = t.number(row, "share")?;
        let ty = t.field(row, "type");
        let cancer_type = CancerType::parse(ty).ok_or_else(|| t.unknown(row.0, "type", ty))?;
        if t.field(row, "stage").eq_ignore_ascii_case("all") {
            type_shares[cancer_type.index()] = share;
        } else {
            stage_shares[t.stage(row)?.index()] = share;
        }
    }
    renormalize(&mut type_shares, "cancer type shares", notes);
    for ty in CancerType::ALL {
        let mut within: Vec<f64> = ty.stages().iter().map(|s| stage_shares[s.index()]).collect();
        renormalize(&mut within, &format!("{} stage shares", ty.as_str()), notes);
        for (s, v) in ty.stages().iter().zip(within) {
            stage_shares[s.index()] = v;
        }
    }
    Ok(StageDistribution {
        type_shares,
        stage_shares,
    })
}

fn parse_survival(t: &Table) -> Result<SurvivalTable> {
    let mut probs = [[f64::NAN; 5]; 6];
    for row in &t.rows {
        let stage = t.stage(row)?;
        let year = t.number(row, "year")?;
        if year.fract() != 0.0 || !(1.0..=5.0).contains(&year) {
            return Err(t.parse_err(row.0, "year", format!("year {year} outside 1..5")));
        }
        probs[stage.index()][year as usize - 1] = t.number(row, "probability")?;
    }
    for stage in StageId::ALL {
        for (k, p) in probs[stage.index()].iter().enumerate() {
            if p.is_nan() {
                return Err(t.table_err(format!("missing probability for {stage} year {}", k + 1)));
            }
        }
    }
    Ok(SurvivalTable {
        probabilities: probs,
    })
}

fn parse_life_table(t: &Table) -> Result<LifeTableDeaths> {
    let rows = t
        .rows
        .iter()
        .map(|row| {
            let sex_token = t.field(row, "sex");
            Ok(LifeTableRow {
                sex: Sex::parse(sex_token).ok_or_else(|| t.unknown(row.0, "sex", sex_token))?,
                age_group: t.field(row, "age_group").to_owned(),
                deaths: t.number(row, "deaths")?,
                life_expectancy: t.number(row, "life_expectancy")?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LifeTableDeaths { rows })
}

fn parse_weights(t: &Table) -> Result<DisabilityWeights> {
    let mut weights = DisabilityWeights::default();
    for row in &t.rows {
        let class_token = t.field(row, "stage_class");
        let class = StageClass::parse(class_token)
            .ok_or_else(|| t.unknown(row.0, "stage_class", class_token))?;
        weights.set(t.population(row)?, class, t.number(row, "weight")?);
    }
    Ok(weights)
}

fn parse_unit_costs(t: &Table, rate: f64) -> Result<UnitCostTable> {
    let mut table = UnitCostTable::default();
    for row in &t.rows {
        let resource = t.field(row, "resource");
        if table.get(resource).is_some() {
            return Err(t.parse_err(row.0, "resource", format!("duplicate resource {resource:?}")));
        }
        let cat = t.field(row, "category");
        table.insert(UnitCost {
            resource: resource.to_owned(),
            category: ResourceCategory::parse(cat)
                .ok_or_else(|| t.unknown(row.0, "category", cat))?,
            cost: t.money(row, rate)?,
        });
    }
    Ok(table)
}

fn parse_profiles(t: &Table, unit_costs: &UnitCostTable) -> Result<ResourceProfile> {
    let rows = t
        .rows
        .iter()
        .map(|row| {
            let resource = t.field(row, "resource");
            if unit_costs.get(resource).is_none() {
                return Err(BundleError::UnknownResource {
                    file: t.file.to_owned(),
                    line: row.0,
                    resource: resource.to_owned(),
                });
            }
            let phase_token = t.field(row, "phase");
            Ok(ProfileRow {
                cell: t.cell(row)?,
                phase: Phase::parse(phase_token)
                    .ok_or_else(|| t.unknown(row.0, "phase", phase_token))?,
                resource: resource.to_owned(),
                quantity: t.number(row, "quantity")?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ResourceProfile { rows })
}

fn parse_drug_costs(t: &Table, rate: f64) -> Result<DrugCostInputs> {
    let mut entries = BTreeMap::new();
    for row in &t.rows {
        let factor = t.currency_factor(row, rate)?;
        entries.insert(
            t.cell(row)?,
            DrugCostEntry {
                cost_per_patient_year: t
                    .optional_number(row, "cost_per_patient_year")?
                    .map(|c| c * factor),
                drug_share_of_total: t.optional_number(row, "drug_share_of_total")?,
            },
        );
    }
    Ok(DrugCostInputs {
        entries,
        regimens: Vec::new(),
    })
}

fn parse_regimens(t: &Table, rate: f64) -> Result<Vec<RegimenRow>> {
    t.rows
        .iter()
        .map(|row| {
            let factor = t.currency_factor(row, rate)?;
            Ok(RegimenRow {
                cell: t.cell(row)?,
                regimen: t.field(row, "regimen").to_owned(),
                share_of_drug_cost: t.number(row, "share_of_drug_cost")?,
                cost_per_patient_year: t.number(row, "cost_per_patient_year")? * factor,
            })
        })
        .collect()
}

fn regimen_class(t: &Table, row: &(u64, StringRecord)) -> Result<RegimenClass> {
    let token = t.field(row, "regimen_class");
    RegimenClass::parse(token).ok_or_else(|| t.unknown(row.0, "regimen_class", token))
}

fn parse_ae_rates(t: &Table) -> Result<Vec<AeRate>> {
    t.rows
        .iter()
        .map(|row| {
            Ok(AeRate {
                event: t.field(row, "event").to_owned(),
                class: regimen_class(t, row)?,
                rate: t.number(row, "rate")?,
            })
        })
        .collect()
}

fn parse_ae_costs(t: &Table, rate: f64) -> Result<Vec<(String, MoneyBySector)>> {
    t.rows
        .iter()
        .map(|row| Ok((t.field(row, "event").to_owned(), t.money(row, rate)?)))
        .collect()
}

fn parse_class_mix(
    t: &Table,
    notes: &mut Vec<String>,
) -> Result<BTreeMap<CellKey, Vec<(RegimenClass, f64)>>> {
    let mut mix: BTreeMap<CellKey, Vec<(RegimenClass, f64)>> = BTreeMap::new();
    for row in &t.rows {
        mix.entry(t.cell(row)?)
            .or_default()
            .push((regimen_class(t, row)?, t.number(row, "share")?));
    }
    for (cell, entries) in mix.iter_mut() {
        let mut shares: Vec<f64> = entries.iter().map(|(_, s)| *s).collect();
        renormalize(&mut shares, &format!("class mix of {cell}"), notes);
        for (e, s) in entries.iter_mut().zip(shares) {
            e.1 = s;
        }
    }
    Ok(mix)
}

fn parse_death_costs(t: &Table) -> Result<DeathCostInputs> {
    let mut values = BTreeMap::new();
    for row in &t.rows {
        let key = t.field(row, "parameter");
        match key {
            "incident_ward_days"
            | "prevalent_treatment_fraction"
            | "prevalent_palliative_units"
            | "prevalent_ward_days" => {
                values.insert(key, t.number(row, "value")?);
            }
            other => return Err(t.unknown(row.0, "parameter", other)),
        }
    }
    let required = |k: &str| {
        values
            .get(k)
            .copied()
            .ok_or_else(|| t.table_err(format!("missing parameter {k}")))
    };
    Ok(DeathCostInputs {
        incident_ward_days: required("incident_ward_days")?,
        prevalent_formula: PrevalentDeathFormula {
            treatment_fraction: required("prevalent_treatment_fraction")?,
            palliative_units: required("prevalent_palliative_units")?,
            ward_days: required("prevalent_ward_days")?,
        },
        prevalent_overrides: BTreeMap::new(),
    })
}

fn parse_overrides(t: &Table, rate: f64) -> Result<BTreeMap<StageId, MoneyBySector>> {
    t.rows
        .iter()
        .map(|row| Ok((t.stage(row)?, t.money(row, rate)?)))
        .collect()
}

fn parse_death_mix(t: &Table, notes: &mut Vec<String>) -> Result<[f64; 6]> {
    let mut mix = [0.0; 6];
    for row in &t.rows {
        mix[t.stage(row)?.index()] = t.number(row, "share")?;
    }
    renormalize(&mut mix, "prevalent death mix", notes);
    Ok(mix)
}
