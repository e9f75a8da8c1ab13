#![allow(dead_code)]

pub mod props;

use std::path::PathBuf;
use std::sync::OnceLock;

use lcburden::bundle::{load_bundle, ScenarioBundle};

pub fn bundle_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/argentina-2023")
}

/// The shipped scenario, loaded once per test binary.
pub fn shipped() -> &'static ScenarioBundle {
    static BUNDLE: OnceLock<ScenarioBundle> = OnceLock::new();
    BUNDLE.get_or_init(|| load_bundle(bundle_dir()).expect("shipped bundle loads"))
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// Published unit costs: resource, public, social security, private, weighted.
pub const UNIT_COSTS: [(&str, f64, f64, f64, f64); 35] = [
    ("pulmonologist_consult", 6.17, 9.69, 11.98, 8.72),
    ("surgical_risk_consult", 6.17, 9.69, 11.98, 8.72),
    ("surgeon_consult", 6.17, 9.69, 11.98, 8.72),
    ("oncologist_consult", 6.17, 9.69, 11.98, 8.72),
    ("radiotherapist_consult", 6.17, 9.69, 11.98, 8.72),
    ("coagulogram", 3.90, 6.65, 7.57, 5.76),
    ("platelets", 0.65, 1.11, 1.26, 0.96),
    ("blood_count", 1.95, 3.33, 3.79, 2.88),
    ("hepatogram", 3.90, 6.65, 7.57, 5.76),
    ("urea", 0.98, 1.66, 1.89, 1.44),
    ("creatinine", 1.30, 2.22, 2.52, 1.92),
    ("calcium", 2.60, 4.44, 5.05, 3.84),
    ("ldh", 1.95, 3.33, 3.79, 2.88),
    ("alp", 0.98, 1.66, 1.89, 1.44),
    ("urine_24h", 1.95, 3.33, 3.79, 2.88),
    ("lung_laboratory", 16.01, 27.29, 31.06, 23.61),
    ("ct_guided_puncture", 76.79, 130.90, 148.98, 113.23),
    ("videofibronoscopy", 50.55, 86.17, 98.07, 74.54),
    ("mediastinoscopy", 162.90, 283.98, 316.03, 243.10),
    ("ihc", 20.58, 33.87, 39.93, 29.79),
    ("xray", 4.48, 7.20, 8.70, 6.41),
    ("chest_ct", 32.47, 48.31, 63.00, 44.64),
    ("ecg", 3.07, 4.86, 5.95, 4.35),
    ("abdomen_pelvis_ct", 40.63, 60.41, 78.83, 55.84),
    ("centellogram", 14.20, 22.52, 27.55, 20.16),
    ("brain_ct_contrast", 72.78, 115.03, 141.19, 103.16),
    ("brain_mri_contrast", 43.51, 74.18, 84.42, 64.16),
    ("pet_ct", 13.46, 20.93, 26.12, 18.92),
    ("spirometry", 9.50, 14.89, 18.43, 13.41),
    ("lobectomy", 713.64, 1_235.23, 1_384.46, 1_060.90),
    ("imrt", 1_491.16, 2_541.82, 2_892.85, 2_198.74),
    ("radiotherapy_3d", 1_084.48, 1_848.60, 2_103.89, 1_599.08),
    ("day_hospital", 62.19, 106.01, 120.65, 91.70),
    ("general_ward", 134.52, 237.16, 260.96, 201.96),
    ("icu", 232.50, 399.60, 451.05, 344.34),
];

/// Published annual cost per patient (public, social, private, weighted),
/// stages in `StageId::ALL` order.
pub const INCIDENT_CARDS: [[f64; 4]; 6] = [
    [2_478.0, 4_196.0, 4_807.0, 3_641.0],
    [7_657.0, 9_560.0, 10_213.0, 8_941.0],
    [17_220.0, 18_574.0, 19_081.0, 18_140.0],
    [36_790.0, 37_603.0, 37_987.0, 37_356.0],
    [3_117.0, 4_437.0, 4_918.0, 4_012.0],
    [3_710.0, 4_318.0, 4_578.0, 4_129.0],
];

pub const PREVALENT_CARDS: [[f64; 4]; 6] = [
    [10_906.0, 11_182.0, 11_337.0, 11_102.0],
    [10_906.0, 11_182.0, 11_337.0, 11_102.0],
    [14_721.0, 15_042.0, 15_209.0, 14_947.0],
    [29_688.0, 30_421.0, 30_752.0, 30_195.0],
    [549.0, 725.0, 838.0, 676.0],
    [633.0, 810.0, 885.0, 755.0],
];

/// Case-weighted averages: NSCLC subtotal, SCLC subtotal, all patients (weighted column).
pub const INCIDENT_CARD_SUBTOTALS: [f64; 3] = [26_206.0, 4_088.0, 22_889.0];
pub const PREVALENT_CARD_SUBTOTALS: [f64; 3] = [18_275.0, 701.0, 15_990.0];

pub const INCIDENT_DEATH_COST: [f64; 4] = [645.68, 1_138.38, 1_252.61, 969.43];

pub const PREVALENT_DEATH_COSTS: [[f64; 3]; 6] = [
    [5_267.75, 6_021.30, 6_290.93],
    [5_267.75, 6_021.30, 6_290.93],
    [6_793.77, 7_565.61, 7_839.56],
    [12_780.17, 13_717.10, 14_056.41],
    [1_125.00, 1_838.56, 2_091.42],
    [1_158.36, 1_872.73, 2_110.34],
];

pub const GRAND_TOTAL: f64 = 556_188_564.0;
pub const SECTOR_TOTALS: [f64; 3] = [203_784_836.0, 260_097_636.0, 92_306_092.0];
pub const INCIDENT_DEATH_BURDEN: f64 = 5_493_698.0;

pub const INCIDENT_CASES: [f64; 6] = [1_287.0, 772.0, 2_573.0, 5_661.0, 636.0, 1_181.0];
pub const PREVALENT_CASES: [f64; 6] = [3_421.0, 1_504.0, 3_477.0, 3_937.0, 1_214.0, 552.0];

pub const YLL_MEN: f64 = 102_908.0;
pub const YLL_WOMEN: f64 = 69_040.0;
pub const DALY_TOTAL: f64 = 179_046.0;

pub const MC_TOTAL_MEAN: f64 = 556.20e6;
pub const MC_TOTAL_BOUNDS: (f64, f64) = (396.96e6, 718.20e6);
pub const MC_NSCLC_I_BOUNDS: (f64, f64) = (1_100.0, 1_479.0);
