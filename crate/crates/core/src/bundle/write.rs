use std::fs;
use std::path::Path;

use super::ScenarioBundle;
use crate::error::BundleError;
use crate::model::{CancerType, MoneyBySector, Sex, StageClass, StageId};

/// Writes `bundle` as a directory that [`super::load_bundle`] reads back to an
/// equal bundle. Money is written in USD; floats use shortest round-trip form.
pub fn write_bundle(bundle: &ScenarioBundle, dir: impl AsRef<Path>) -> Result<(), BundleError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| BundleError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let put = |name: &str, text: String| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|source| BundleError::Io { path, source })
    };

    let manifest =
        toml::to_string(&bundle.manifest).map_err(|e| BundleError::Manifest(e.to_string()))?;
    put("manifest.toml", manifest)?;

    let epi = &bundle.epi;
    let mut s = String::from("parameter,value\n");
    s += &format!("incidence,{}\n", epi.incidence);
    s += &format!("prevalence_1y,{}\n", epi.prevalence_1y);
    if let Some(p3) = epi.prevalence_3y {
        s += &format!("prevalence_3y,{p3}\n");
    }
    s += &format!("prevalence_5y,{}\n", epi.prevalence_5y);
    s += &format!("deaths,{}\n", epi.deaths);
    s += &format!("mi_ratio,{}\n", epi.mi_ratio);
    s += &format!("sex_split_incident,{}\n", epi.sex_split_incident);
    if let Some(p) = epi.sex_split_prevalent_deaths {
        s += &format!("sex_split_prevalent_deaths,{p}\n");
    }
    s += &format!("survival_multiplier_male,{}\n", epi.survival_multiplier(Sex::Male));
    s += &format!("survival_multiplier_female,{}\n", epi.survival_multiplier(Sex::Female));
    put("epi.csv", s)?;

    let mut s = String::from("population,type,stage,share\n");
    for ty in CancerType::ALL {
        s += &format!("incident,{},all,{}\n", ty.as_str(), bundle.stages.type_shares[ty.index()]);
        for &st in ty.stages() {
            s += &format!(
                "incident,{},{},{}\n",
                ty.as_str(),
                st.stage_token(),
                bundle.stages.stage_share(st)
            );
        }
    }
    put("stage_distribution.csv", s)?;

    let mut s = String::from("type,stage,year,probability\n");
    for st in StageId::ALL {
        for (k, p) in bundle.survival.row(st).iter().enumerate() {
            s += &format!("{},{},{},{p}\n", st.cancer_type().as_str(), st.stage_token(), k + 1);
        }
    }
    put("survival.csv", s)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sex", "age_group", "deaths", "life_expectancy"])
        .map_err(|e| csv_err("life_table.csv", e))?;
    for r in &bundle.life_table.rows {
        w.write_record([
            r.sex.as_str().to_owned(),
            r.age_group.clone(),
            r.deaths.to_string(),
            r.life_expectancy.to_string(),
        ])
        .map_err(|e| csv_err("life_table.csv", e))?;
    }
    put("life_table.csv", finish(w, "life_table.csv")?)?;

    let mut s = String::from("population,stage_class,weight\n");
    for pop in crate::model::Population::ALL {
        for class in StageClass::ALL {
            if let Some(wt) = bundle.disability_weights.get(pop, class) {
                s += &format!("{},{},{wt}\n", pop.as_str(), class.as_str());
            }
        }
    }
    put("disability_weights.csv", s)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["resource", "category", "public", "social", "private", "currency"])
        .map_err(|e| csv_err("unit_costs.csv", e))?;
    for u in bundle.unit_costs.rows() {
        let mut rec = vec![u.resource.clone(), u.category.as_str().to_owned()];
        rec.extend(money_fields(&u.cost));
        rec.push("USD".into());
        w.write_record(rec).map_err(|e| csv_err("unit_costs.csv", e))?;
    }
    put("unit_costs.csv", finish(w, "unit_costs.csv")?)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["population", "type", "stage", "phase", "resource", "quantity"])
        .map_err(|e| csv_err("resource_profiles.csv", e))?;
    for r in &bundle.profiles.rows {
        w.write_record([
            r.cell.population.as_str().to_owned(),
            r.cell.stage.cancer_type().as_str().to_owned(),
            r.cell.stage.stage_token().to_owned(),
            r.phase.as_str().to_owned(),
            r.resource.clone(),
            r.quantity.to_string(),
        ])
        .map_err(|e| csv_err("resource_profiles.csv", e))?;
    }
    put("resource_profiles.csv", finish(w, "resource_profiles.csv")?)?;

    let mut s = String::from(
        "population,type,stage,cost_per_patient_year,drug_share_of_total,currency\n",
    );
    for (cell, e) in &bundle.drugs.entries {
        s += &format!(
            "{},{},{},{},{},USD\n",
            cell.population.as_str(),
            cell.stage.cancer_type().as_str(),
            cell.stage.stage_token(),
            opt(e.cost_per_patient_year),
            opt(e.drug_share_of_total)
        );
    }
    put("drug_costs.csv", s)?;

    if !bundle.drugs.regimens.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "population",
            "type",
            "stage",
            "regimen",
            "share_of_drug_cost",
            "cost_per_patient_year",
            "currency",
        ])
        .map_err(|e| csv_err("regimens.csv", e))?;
        for r in &bundle.drugs.regimens {
            w.write_record([
                r.cell.population.as_str().to_owned(),
                r.cell.stage.cancer_type().as_str().to_owned(),
                r.cell.stage.stage_token().to_owned(),
                r.regimen.clone(),
                r.share_of_drug_cost.to_string(),
                r.cost_per_patient_year.to_string(),
                "USD".into(),
            ])
            .map_err(|e| csv_err("regimens.csv", e))?;
        }
        put("regimens.csv", finish(w, "regimens.csv")?)?;
    }

    let ae = &bundle.adverse_events;
    let mut s = String::from("event,regimen_class,rate\n");
    for r in &ae.rates {
        s += &format!("{},{},{}\n", r.event, r.class.as_str(), r.rate);
    }
    put("ae_rates.csv", s)?;

    let mut s = String::from("event,public,social,private,currency\n");
    for (event, cost) in &ae.costs {
        s += &format!("{event},{},USD\n", money_fields(cost).join(","));
    }
    put("ae_costs.csv", s)?;

    let mut s = String::from("population,type,stage,regimen_class,share\n");
    for (cell, mix) in &ae.class_mix {
        for (class, share) in mix {
            s += &format!(
                "{},{},{},{},{share}\n",
                cell.population.as_str(),
                cell.stage.cancer_type().as_str(),
                cell.stage.stage_token(),
                class.as_str()
            );
        }
    }
    put("class_mix.csv", s)?;

    let dc = &bundle.death_costs;
    let s = format!(
        "parameter,value\nincident_ward_days,{}\nprevalent_treatment_fraction,{}\nprevalent_palliative_units,{}\nprevalent_ward_days,{}\n",
        dc.incident_ward_days,
        dc.prevalent_formula.treatment_fraction,
        dc.prevalent_formula.palliative_units,
        dc.prevalent_formula.ward_days
    );
    put("death_costs.csv", s)?;

    if !dc.prevalent_overrides.is_empty() {
        let mut s = String::from("type,stage,public,social,private,currency\n");
        for (stage, cost) in &dc.prevalent_overrides {
            s += &format!(
                "{},{},{},USD\n",
                stage.cancer_type().as_str(),
                stage.stage_token(),
                money_fields(cost).join(",")
            );
        }
        put("death_cost_overrides.csv", s)?;
    }

    if let Some(mix) = &bundle.prevalent_death_mix {
        let mut s = String::from("type,stage,share\n");
        for st in StageId::ALL {
            s += &format!(
                "{},{},{}\n",
                st.cancer_type().as_str(),
                st.stage_token(),
                mix[st.index()]
            );
        }
        put("prevalent_death_mix.csv", s)?;
    }
    Ok(())
}

fn money_fields(m: &MoneyBySector) -> Vec<String> {
    vec![
        m.public.to_string(),
        m.social_security.to_string(),
        m.private.to_string(),
    ]
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(file: &str, e: csv::Error) -> BundleError {
    BundleError::Table {
        file: file.to_owned(),
        message: e.to_string(),
    }
}

fn finish(w: csv::Writer<Vec<u8>>, file: &str) -> Result<String, BundleError> {
    let bytes = w.into_inner().map_err(|e| BundleError::Table {
        file: file.to_owned(),
        message: e.to_string(),
    })?;
    String::from_utf8(bytes).map_err(|e| BundleError::Table {
        file: file.to_owned(),
        message: e.to_string(),
    })
}
