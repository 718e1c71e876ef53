/**
 * Wire types mirroring the service's published JSON schemas.
 * These are the single source of truth the UI renders from; the UI never
 * computes risk values itself.
 */

export type BenignState =
  | 'none_known'
  | 'non_proliferative'
  | 'unknown_biopsy'
  | 'proliferative_usual'
  | 'atypical_hyperplasia'
  | 'lcis';

export type DensityMeasure = 'visual_percent' | 'birads' | 'volumetric_percent';

export interface Snp {
  risk_allele_freq: number;
  per_allele_or: number;
  genotype: number | null;
}

export interface Profile {
  menarche_age: number | null;
  parity: number | 'nulliparous' | null;
  menopause_status: 'pre' | 'post' | null;
  menopause_age: number | null;
  height_m: number | null;
  bmi: number | null;
  hrt_status: 'never' | 'current' | 'past' | null;
  hrt_type: 'estrogen_only' | 'combined' | null;
  hrt_years: number | null;
  benign_disease: BenignState;
  density_measure: DensityMeasure | null;
  density_value: number | null;
  density_age: number | null;
  density_bmi: number | null;
  snps: Snp[];
}

export type BrcaTest = 'untested' | 'negative' | 'brca1' | 'brca2';

export interface PedigreeMember {
  id: string;
  sex: 'F' | 'M';
  mother_id: string | null;
  father_id: string | null;
  breast_age: number | null;
  ovarian_age: number | null;
  censor_age: number;
  brca_test: BrcaTest;
}

export interface AssessRequest {
  profile: Profile;
  pedigree: PedigreeMember[];
  current_age: number;
  horizons: number[];
}

export interface FactorAudit {
  factor: string;
  multiplier: number;
}

export interface RelativeHazardOut {
  value: number;
  factors: FactorAudit[];
  max_rule_pending: boolean;
  intermediate_factor: number | null;
}

export interface PosteriorCell {
  c1: number;
  c2: number;
  weight: number;
}

export interface HazardBand {
  age_lo: number;
  age_hi: number;
  rate: number;
}

export interface CurvePoint {
  age: number;
  risk: number;
}

export interface Assessment {
  schema: string;
  params_version: string;
  t0: number;
  ten_year_risk: number;
  lifetime_risk: number;
  risk_category: string;
  hazard_basis: string;
  relative_hazard: RelativeHazardOut;
  max_rule: Record<string, unknown> | null;
  genotype_posterior: PosteriorCell[];
  hazard_curve: HazardBand[];
  risk_curve: CurvePoint[];
}

export interface HorizonRisk {
  horizon: number;
  age: number;
  risk: number;
}

export interface AssessResponse {
  assessment: Assessment;
  horizon_risks: HorizonRisk[];
  params_version: string;
}

export interface WhatIfDelta {
  field: string;
  value: unknown;
}

export interface CategoryTransition {
  before: string;
  after: string;
  changed: boolean;
}

export interface WhatIfItem {
  delta: WhatIfDelta;
  response: AssessResponse;
  category_transition: CategoryTransition;
}

export interface WhatIfResponse {
  base: AssessResponse;
  items: WhatIfItem[];
  params_version: string;
}

export interface FieldError {
  field: string;
  message: string;
}
