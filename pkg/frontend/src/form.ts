/**
 * Form state and structural validation.
 *
 * Validation here duplicates only structural constraints (types, ranges,
 * required companions); domain rules stay server-side and surface as 422
 * field errors.
 */

import type {
  AssessRequest,
  BenignState,
  BrcaTest,
  DensityMeasure,
  PedigreeMember,
  Profile,
  Snp,
} from './types.js';

export interface FormState {
  profile: Profile;
  pedigree: PedigreeMember[];
  currentAge: number;
  horizons: number[];
}

export const PROBAND_ID = 'proband';

export function emptyProfile(): Profile {
  return {
    menarche_age: null,
    parity: null,
    menopause_status: null,
    menopause_age: null,
    height_m: null,
    bmi: null,
    hrt_status: null,
    hrt_type: null,
    hrt_years: null,
    benign_disease: 'none_known',
    density_measure: null,
    density_value: null,
    density_age: null,
    density_bmi: null,
    snps: [],
  };
}

export function defaultFormState(age = 47): FormState {
  return {
    profile: emptyProfile(),
    pedigree: [
      {
        id: PROBAND_ID,
        sex: 'F',
        mother_id: null,
        father_id: null,
        breast_age: null,
        ovarian_age: null,
        censor_age: age,
        brca_test: 'untested',
      },
    ],
    currentAge: age,
    horizons: [10],
  };
}

export interface FormErrors {
  [field: string]: string;
}

const BENIGN_STATES: BenignState[] = [
  'none_known',
  'non_proliferative',
  'unknown_biopsy',
  'proliferative_usual',
  'atypical_hyperplasia',
  'lcis',
];

const DENSITY_MEASURES: DensityMeasure[] = [
  'visual_percent',
  'birads',
  'volumetric_percent',
];

export function validateForm(state: FormState): FormErrors {
  const errors: FormErrors = {};
  const p = state.profile;

  if (!(state.currentAge >= 20 && state.currentAge < 85)) {
    errors['current_age'] = 'assessment age must be in [20, 85)';
  }
  if (p.menarche_age !== null && (p.menarche_age < 5 || p.menarche_age > 30)) {
    errors['menarche_age'] = 'implausible menarche age';
  }
  if (p.bmi !== null && (p.bmi < 10 || p.bmi > 80)) {
    errors['bmi'] = 'BMI must be within [10, 80]';
  }
  if (p.menopause_age !== null && p.menopause_status !== 'post') {
    errors['menopause_age'] = 'menopause age needs post-menopausal status';
  }
  if (p.hrt_status === 'current' || p.hrt_status === 'past') {
    if (p.hrt_type === null) errors['hrt_type'] = 'hormone therapy type required';
    if (p.hrt_years === null || p.hrt_years < 0) {
      errors['hrt_years'] = 'elapsed years required';
    }
  }
  if (!BENIGN_STATES.includes(p.benign_disease)) {
    errors['benign_disease'] = 'unknown benign-disease state';
  }
  if (p.density_measure !== null) {
    if (!DENSITY_MEASURES.includes(p.density_measure)) {
      errors['density_measure'] = 'unknown density measure';
    }
    if (p.density_value === null) errors['density_value'] = 'density value required';
    if (p.density_age === null) errors['density_age'] = 'age at mammogram required';
    if (p.density_measure === 'birads' && p.density_value !== null) {
      if (![1, 2, 3, 4].includes(p.density_value)) {
        errors['density_value'] = 'BI-RADS category must be 1-4';
      }
    } else if (p.density_value !== null && (p.density_value < 0 || p.density_value > 100)) {
      errors['density_value'] = 'density percent must be within [0, 100]';
    }
  }
  for (const [i, snp] of p.snps.entries()) {
    if (!(snp.risk_allele_freq > 0 && snp.risk_allele_freq < 1)) {
      errors[`snps.${i}.risk_allele_freq`] = 'allele frequency must be in (0, 1)';
    }
    if (!(snp.per_allele_or > 0)) {
      errors[`snps.${i}.per_allele_or`] = 'odds ratio must be positive';
    }
    if (snp.genotype !== null && ![0, 1, 2].includes(snp.genotype)) {
      errors[`snps.${i}.genotype`] = 'genotype must be 0, 1, 2 or unknown';
    }
  }

  const ids = new Set<string>();
  for (const [i, m] of state.pedigree.entries()) {
    if (!m.id) errors[`pedigree.${i}.id`] = 'relative needs an id';
    if (ids.has(m.id)) errors[`pedigree.${i}.id`] = 'duplicate id';
    ids.add(m.id);
    if (m.censor_age < 0 || m.censor_age > 85) {
      errors[`pedigree.${i}.censor_age`] = 'age must be within [0, 85]';
    }
    for (const key of ['breast_age', 'ovarian_age'] as const) {
      const age = m[key];
      if (age !== null && (age < 20 || age > m.censor_age)) {
        errors[`pedigree.${i}.${key}`] = 'event age must be in [20, current age]';
      }
    }
  }
  for (const [i, m] of state.pedigree.entries()) {
    for (const key of ['mother_id', 'father_id'] as const) {
      const ref = m[key];
      if (ref !== null && !ids.has(ref)) {
        errors[`pedigree.${i}.${key}`] = `unknown relative '${ref}'`;
      }
    }
  }
  if (state.pedigree.length === 0 || state.pedigree[0]!.id !== PROBAND_ID) {
    errors['pedigree'] = 'first pedigree member must be the assessed woman';
  }
  return errors;
}

export function buildRequest(state: FormState): AssessRequest {
  return {
    profile: { ...state.profile, snps: state.profile.snps.map((s) => ({ ...s })) },
    pedigree: state.pedigree.map((m) => ({ ...m })),
    current_age: state.currentAge,
    horizons: [...state.horizons],
  };
}

export function formFromRequest(request: AssessRequest): FormState {
  return {
    profile: { ...request.profile, snps: request.profile.snps.map((s) => ({ ...s })) },
    pedigree: request.pedigree.map((m) => ({ ...m })),
    currentAge: request.current_age,
    horizons: [...request.horizons],
  };
}

// -- pedigree editor operations --------------------------------------------

let relativeCounter = 0;

export function resetRelativeCounter(): void {
  relativeCounter = 0;
}

export function addRelative(
  state: FormState,
  sex: 'F' | 'M',
  options: Partial<Omit<PedigreeMember, 'id' | 'sex'>> = {},
): FormState {
  relativeCounter += 1;
  const member: PedigreeMember = {
    id: `rel${relativeCounter}`,
    sex,
    mother_id: null,
    father_id: null,
    breast_age: null,
    ovarian_age: null,
    censor_age: 60,
    brca_test: 'untested',
    ...options,
  };
  return { ...state, pedigree: [...state.pedigree, member] };
}

export function removeRelative(state: FormState, id: string): FormState {
  if (id === PROBAND_ID) return state;
  const pedigree = state.pedigree
    .filter((m) => m.id !== id)
    .map((m) => ({
      ...m,
      mother_id: m.mother_id === id ? null : m.mother_id,
      father_id: m.father_id === id ? null : m.father_id,
    }));
  return { ...state, pedigree };
}

export function updateRelative(
  state: FormState,
  id: string,
  patch: Partial<PedigreeMember>,
): FormState {
  return {
    ...state,
    pedigree: state.pedigree.map((m) => (m.id === id ? { ...m, ...patch, id: m.id } : m)),
  };
}

export function setTestResult(state: FormState, id: string, test: BrcaTest): FormState {
  return updateRelative(state, id, { brca_test: test });
}
