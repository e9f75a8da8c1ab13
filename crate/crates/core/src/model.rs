//! Shared domain vocabulary: populations, cancer types and stages, sexes,
//! health-system sectors and money split across them.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

/// Incident (diagnosed this year) or prevalent (diagnosed in the five prior years, still alive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    Incident,
    Prevalent,
}

impl Population {
    pub const ALL: [Population; 2] = [Population::Incident, Population::Prevalent];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Population::Incident => "incident",
            Population::Prevalent => "prevalent",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "incident" => Some(Population::Incident),
            "prevalent" => Some(Population::Prevalent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CancerType {
    #[serde(rename = "NSCLC")]
    Nsclc,
    #[serde(rename = "SCLC")]
    Sclc,
}

impl CancerType {
    pub const ALL: [CancerType; 2] = [CancerType::Nsclc, CancerType::Sclc];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CancerType::Nsclc => "NSCLC",
            CancerType::Sclc => "SCLC",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_uppercase().as_str() {
            "NSCLC" => Some(CancerType::Nsclc),
            "SCLC" => Some(CancerType::Sclc),
            _ => None,
        }
    }

    pub fn stages(self) -> &'static [StageId] {
        match self {
            CancerType::Nsclc => &StageId::ALL[..4],
            CancerType::Sclc => &StageId::ALL[4..],
        }
    }
}

/// Localized stages (NSCLC I-III, SCLC limited) versus metastatic ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageClass {
    Localized,
    Metastatic,
}

impl StageClass {
    pub const ALL: [StageClass; 2] = [StageClass::Localized, StageClass::Metastatic];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StageClass::Localized => "localized",
            StageClass::Metastatic => "metastatic",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "localized" => Some(StageClass::Localized),
            "metastatic" => Some(StageClass::Metastatic),
            _ => None,
        }
    }
}

/// A cancer type together with its stage. Only the six valid combinations exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StageId {
    NsclcI,
    NsclcII,
    NsclcIII,
    NsclcIV,
    SclcLimited,
    SclcExtended,
}

impl StageId {
    pub const ALL: [StageId; 6] = [
        StageId::NsclcI,
        StageId::NsclcII,
        StageId::NsclcIII,
        StageId::NsclcIV,
        StageId::SclcLimited,
        StageId::SclcExtended,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn cancer_type(self) -> CancerType {
        match self {
            StageId::NsclcI | StageId::NsclcII | StageId::NsclcIII | StageId::NsclcIV => {
                CancerType::Nsclc
            }
            StageId::SclcLimited | StageId::SclcExtended => CancerType::Sclc,
        }
    }

    pub fn stage_class(self) -> StageClass {
        match self {
            StageId::NsclcIV | StageId::SclcExtended => StageClass::Metastatic,
            _ => StageClass::Localized,
        }
    }

    /// Stage token as written in bundle tables (`I`..`IV`, `limited`, `extended`).
    pub fn stage_token(self) -> &'static str {
        match self {
            StageId::NsclcI => "I",
            StageId::NsclcII => "II",
            StageId::NsclcIII => "III",
            StageId::NsclcIV => "IV",
            StageId::SclcLimited => "limited",
            StageId::SclcExtended => "extended",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StageId::NsclcI => "Stage I",
            StageId::NsclcII => "Stage II",
            StageId::NsclcIII => "Stage III",
            StageId::NsclcIV => "Stage IV",
            StageId::SclcLimited => "Limited",
            StageId::SclcExtended => "Extended",
        }
    }

    pub fn from_parts(cancer_type: CancerType, stage: &str) -> Option<Self> {
        let stage = stage.trim();
        let id = match (cancer_type, stage.to_ascii_lowercase().as_str()) {
            (CancerType::Nsclc, "i") => StageId::NsclcI,
            (CancerType::Nsclc, "ii") => StageId::NsclcII,
            (CancerType::Nsclc, "iii") => StageId::NsclcIII,
            (CancerType::Nsclc, "iv") => StageId::NsclcIV,
            (CancerType::Sclc, "limited") => StageId::SclcLimited,
            (CancerType::Sclc, "extended") => StageId::SclcExtended,
            _ => return None,
        };
        Some(id)
    }
}

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.cancer_type().as_str(), self.stage_token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
}

impl Sex {
    pub const ALL: [Sex; 2] = [Sex::Male, Sex::Female];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Male => "male",
            Sex::Female => "female",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "male" => Some(Sex::Male),
            "female" => Some(Sex::Female),
            _ => None,
        }
    }

    /// Share of this sex given the male fraction.
    pub fn share(self, male_fraction: f64) -> f64 {
        match self {
            Sex::Male => male_fraction,
            Sex::Female => 1.0 - male_fraction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Public,
    SocialSecurity,
    Private,
}

impl Sector {
    pub const ALL: [Sector; 3] = [Sector::Public, Sector::SocialSecurity, Sector::Private];

    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Public => "public",
            Sector::SocialSecurity => "social_security",
            Sector::Private => "private",
        }
    }
}

/// Population coverage fractions of the three health subsectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorShares {
    pub public: f64,
    pub social_security: f64,
    pub private: f64,
}

impl SectorShares {
    pub fn get(&self, sector: Sector) -> f64 {
        match sector {
            Sector::Public => self.public,
            Sector::SocialSecurity => self.social_security,
            Sector::Private => self.private,
        }
    }

    pub fn sum(&self) -> f64 {
        self.public + self.social_security + self.private
    }
}

/// A USD amount for each of the three sectors. The coverage-weighted value is
/// derived on demand so it can never drift from the sector values.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MoneyBySector {
    pub public: f64,
    pub social_security: f64,
    pub private: f64,
}

impl MoneyBySector {
    pub const ZERO: MoneyBySector = MoneyBySector {
        public: 0.0,
        social_security: 0.0,
        private: 0.0,
    };

    pub fn new(public: f64, social_security: f64, private: f64) -> Self {
        MoneyBySector {
            public,
            social_security,
            private,
        }
    }

    pub fn uniform(value: f64) -> Self {
        MoneyBySector::new(value, value, value)
    }

    pub fn get(&self, sector: Sector) -> f64 {
        match sector {
            Sector::Public => self.public,
            Sector::SocialSecurity => self.social_security,
            Sector::Private => self.private,
        }
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        MoneyBySector::new(f(self.public), f(self.social_security), f(self.private))
    }

    /// Coverage-weighted average: `Σ share_s × value_s`.
    pub fn weighted(&self, shares: &SectorShares) -> f64 {
        shares.public * self.public
            + shares.social_security * self.social_security
            + shares.private * self.private
    }

    /// Each sector value multiplied by its coverage share. The three
    /// components of the result sum to [`Self::weighted`].
    pub fn apportion(&self, shares: &SectorShares) -> Self {
        MoneyBySector::new(
            shares.public * self.public,
            shares.social_security * self.social_security,
            shares.private * self.private,
        )
    }

    pub fn total(&self) -> f64 {
        self.public + self.social_security + self.private
    }

    pub fn is_nonnegative(&self) -> bool {
        self.public >= 0.0 && self.social_security >= 0.0 && self.private >= 0.0
    }
}

impl Add for MoneyBySector {
    type Output = MoneyBySector;

    fn add(self, rhs: MoneyBySector) -> MoneyBySector {
        MoneyBySector::new(
            self.public + rhs.public,
            self.social_security + rhs.social_security,
            self.private + rhs.private,
        )
    }
}

impl AddAssign for MoneyBySector {
    fn add_assign(&mut self, rhs: MoneyBySector) {
        *self = *self + rhs;
    }
}

impl Mul<f64> for MoneyBySector {
    type Output = MoneyBySector;

    fn mul(self, rhs: f64) -> MoneyBySector {
        self.map(|v| v * rhs)
    }
}

/// Cost bucket a unit-cost resource belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceCategory {
    Diagnosis,
    Surgery,
    Radiotherapy,
    DrugAdministration,
    ConsultationLabFollowup,
    Hospitalization,
    Palliative,
}

impl ResourceCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ResourceCategory::Diagnosis => "diagnosis",
            ResourceCategory::Surgery => "surgery",
            ResourceCategory::Radiotherapy => "radiotherapy",
            ResourceCategory::DrugAdministration => "drug_administration",
            ResourceCategory::ConsultationLabFollowup => "consultation_lab_followup",
            ResourceCategory::Hospitalization => "hospitalization",
            ResourceCategory::Palliative => "palliative",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        let c = match token.trim().to_ascii_lowercase().as_str() {
            "diagnosis" => ResourceCategory::Diagnosis,
            "surgery" => ResourceCategory::Surgery,
            "radiotherapy" => ResourceCategory::Radiotherapy,
            "drug_administration" => ResourceCategory::DrugAdministration,
            "consultation_lab_followup" => ResourceCategory::ConsultationLabFollowup,
            "hospitalization" => ResourceCategory::Hospitalization,
            "palliative" => ResourceCategory::Palliative,
            _ => return None,
        };
        Some(c)
    }
}

/// Reporting bucket of a patient cost card.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionCategory {
    Diagnosis,
    Surgery,
    Radiotherapy,
    Drugs,
    DrugAdministration,
    ConsultationLabFollowup,
    Hospitalization,
    Palliative,
    AdverseEvents,
}

impl CompositionCategory {
    pub const ALL: [CompositionCategory; 9] = [
        CompositionCategory::Diagnosis,
        CompositionCategory::Surgery,
        CompositionCategory::Radiotherapy,
        CompositionCategory::Drugs,
        CompositionCategory::DrugAdministration,
        CompositionCategory::ConsultationLabFollowup,
        CompositionCategory::Hospitalization,
        CompositionCategory::Palliative,
        CompositionCategory::AdverseEvents,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CompositionCategory::Diagnosis => "diagnosis",
            CompositionCategory::Surgery => "surgery",
            CompositionCategory::Radiotherapy => "radiotherapy",
            CompositionCategory::Drugs => "drugs",
            CompositionCategory::DrugAdministration => "drug_administration",
            CompositionCategory::ConsultationLabFollowup => "consultation_lab_followup",
            CompositionCategory::Hospitalization => "hospitalization",
            CompositionCategory::Palliative => "palliative",
            CompositionCategory::AdverseEvents => "adverse_events",
        }
    }
}

impl From<ResourceCategory> for CompositionCategory {
    fn from(c: ResourceCategory) -> Self {
        match c {
            ResourceCategory::Diagnosis => CompositionCategory::Diagnosis,
            ResourceCategory::Surgery => CompositionCategory::Surgery,
            ResourceCategory::Radiotherapy => CompositionCategory::Radiotherapy,
            ResourceCategory::DrugAdministration => CompositionCategory::DrugAdministration,
            ResourceCategory::ConsultationLabFollowup => {
                CompositionCategory::ConsultationLabFollowup
            }
            ResourceCategory::Hospitalization => CompositionCategory::Hospitalization,
            ResourceCategory::Palliative => CompositionCategory::Palliative,
        }
    }
}

/// Systemic therapy class used to look up adverse-event rates.
/// `Untreated` patients receive no systemic therapy and carry no adverse events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegimenClass {
    #[serde(rename = "ALK")]
    Alk,
    #[serde(rename = "antiEGFR")]
    AntiEgfr,
    #[serde(rename = "immunotherapy")]
    Immunotherapy,
    #[serde(rename = "chemotherapy")]
    Chemotherapy,
    #[serde(rename = "untreated")]
    Untreated,
}

impl RegimenClass {
    pub const ALL: [RegimenClass; 5] = [
        RegimenClass::Alk,
        RegimenClass::AntiEgfr,
        RegimenClass::Immunotherapy,
        RegimenClass::Chemotherapy,
        RegimenClass::Untreated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegimenClass::Alk => "ALK",
            RegimenClass::AntiEgfr => "antiEGFR",
            RegimenClass::Immunotherapy => "immunotherapy",
            RegimenClass::Chemotherapy => "chemotherapy",
            RegimenClass::Untreated => "untreated",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        let c = match token.trim().to_ascii_lowercase().as_str() {
            "alk" => RegimenClass::Alk,
            "antiegfr" | "anti_egfr" => RegimenClass::AntiEgfr,
            "immunotherapy" => RegimenClass::Immunotherapy,
            "chemotherapy" => RegimenClass::Chemotherapy,
            "untreated" => RegimenClass::Untreated,
            _ => return None,
        };
        Some(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    DiagnosisStaging,
    TreatmentFollowup,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::DiagnosisStaging => "diagnosis_staging",
            Phase::TreatmentFollowup => "treatment_followup",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "diagnosis_staging" => Some(Phase::DiagnosisStaging),
            "treatment_followup" => Some(Phase::TreatmentFollowup),
            _ => None,
        }
    }
}

/// Key of one (population, type, stage) cost or case cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub population: Population,
    pub stage: StageId,
}

impl CellKey {
    pub fn new(population: Population, stage: StageId) -> Self {
        CellKey { population, stage }
    }

    pub fn all() -> impl Iterator<Item = CellKey> {
        Population::ALL
            .into_iter()
            .flat_map(|p| StageId::ALL.into_iter().map(move |s| CellKey::new(p, s)))
    }

    pub fn index(self) -> usize {
        self.population.index() * StageId::ALL.len() + self.stage.index()
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.population.as_str(), self.stage)
    }
}

/// Dense storage for one value per (population, stage) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMap<T> {
    values: Vec<T>,
}

impl<T: Clone> CellMap<T> {
    pub fn filled(value: T) -> Self {
        CellMap {
            values: vec![value; Population::ALL.len() * StageId::ALL.len()],
        }
    }
}

impl<T> CellMap<T> {
    pub fn from_fn(mut f: impl FnMut(CellKey) -> T) -> Self {
        CellMap {
            values: CellKey::all().map(&mut f).collect(),
        }
    }

    pub fn get(&self, key: CellKey) -> &T {
        &self.values[key.index()]
    }

    pub fn get_mut(&mut self, key: CellKey) -> &mut T {
        &mut self.values[key.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (CellKey, &T)> {
        CellKey::all().zip(self.values.iter())
    }
}
