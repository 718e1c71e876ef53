import { beforeEach, describe, expect, it } from 'vitest';

import {
  addRelative,
  buildRequest,
  defaultFormState,
  formFromRequest,
  removeRelative,
  resetRelativeCounter,
  setTestResult,
  updateRelative,
  validateForm,
} from '../src/form.js';

beforeEach(() => resetRelativeCounter());

describe('form round-trip', () => {
  it('form -> request -> form preserves all fields', () => {
    let state = defaultFormState(52);
    state = {
      ...state,
      profile: {
        ...state.profile,
        menarche_age: 11,
        parity: 28,
        menopause_status: 'post',
        menopause_age: 50,
        height_m: 1.7,
        bmi: 27.5,
        hrt_status: 'past',
        hrt_type: 'combined',
        hrt_years: 2,
        benign_disease: 'unknown_biopsy',
        density_measure: 'birads',
        density_value: 3,
        density_age: 51,
        density_bmi: null,
        snps: [{ risk_allele_freq: 0.2, per_allele_or: 1.3, genotype: 1 }],
      },
    };
    state = addRelative(state, 'F', { breast_age: 44, censor_age: 62 });
    const request = buildRequest(state);
    const roundTripped = formFromRequest(request);
    expect(roundTripped).toEqual(state);
    // deep copies, not aliases
    expect(roundTripped.profile.snps[0]).not.toBe(state.profile.snps[0]);
    expect(buildRequest(roundTripped)).toEqual(request);
  });
});

describe('structural validation', () => {
  it('accepts the default state', () => {
    expect(validateForm(defaultFormState())).toEqual({});
  });

  it('flags hormone therapy without type or years', () => {
    const state = defaultFormState();
    state.profile.hrt_status = 'current';
    const errors = validateForm(state);
    expect(errors['hrt_type']).toBeDefined();
    expect(errors['hrt_years']).toBeDefined();
  });

  it('flags BMI outside range and bad BI-RADS category', () => {
    const state = defaultFormState();
    state.profile.bmi = 5;
    state.profile.density_measure = 'birads';
    state.profile.density_value = 9;
    state.profile.density_age = 50;
    const errors = validateForm(state);
    expect(errors['bmi']).toBeDefined();
    expect(errors['density_value']).toContain('BI-RADS');
  });

  it('flags menopause age without post status', () => {
    const state = defaultFormState();
    state.profile.menopause_age = 50;
    expect(validateForm(state)['menopause_age']).toBeDefined();
  });

  it('flags unknown parent references and event-age ordering', () => {
    let state = defaultFormState();
    state = addRelative(state, 'F', { mother_id: 'ghost' });
    const errorsRef = validateForm(state);
    expect(errorsRef['pedigree.1.mother_id']).toContain('ghost');

    let state2 = defaultFormState();
    state2 = addRelative(state2, 'F', { breast_age: 70, censor_age: 60 });
    expect(validateForm(state2)['pedigree.1.breast_age']).toBeDefined();
  });

  it('flags assessment age outside the model range', () => {
    const state = defaultFormState(19);
    expect(validateForm(state)['current_age']).toBeDefined();
  });
});

describe('pedigree editor', () => {
  it('adds, updates and removes relatives; proband is fixed', () => {
    let state = defaultFormState();
    state = addRelative(state, 'F', { censor_age: 62 });
    state = addRelative(state, 'M', { censor_age: 70 });
    expect(state.pedigree).toHaveLength(3);

    const mumId = state.pedigree[1]!.id;
    const dadId = state.pedigree[2]!.id;
    state = updateRelative(state, state.pedigree[0]!.id, {
      mother_id: mumId,
      father_id: dadId,
    });
    state = setTestResult(state, mumId, 'brca1');
    expect(state.pedigree[1]!.brca_test).toBe('brca1');

    state = removeRelative(state, mumId);
    expect(state.pedigree).toHaveLength(2);
    // dangling parent link cleared
    expect(state.pedigree[0]!.mother_id).toBeNull();
    expect(state.pedigree[0]!.father_id).toBe(dadId);

    // the proband cannot be removed
    const before = state.pedigree.length;
    state = removeRelative(state, state.pedigree[0]!.id);
    expect(state.pedigree).toHaveLength(before);
  });
});
