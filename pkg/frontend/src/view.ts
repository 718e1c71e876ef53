/**
 * Pure view-model builders.
 *
 * Every numeric field is passed through from the API response unchanged
 * (the `value` members are the exact response numbers; `display` members
 * are formatted copies for the DOM). The UI performs no risk arithmetic.
 */

import type {
  AssessRequest,
  AssessResponse,
  FactorAudit,
  WhatIfItem,
} from './types.js';

export const CATEGORY_BANDS = ['<2%', '2-3%', '3-5%', '5-8%', '>=8%'] as const;

export interface NumberView {
  value: number;
  display: string;
}

export interface PosteriorRow {
  label: string;
  value: number;
  display: string;
}

export interface FactorRow {
  factor: string;
  multiplier: number;
  display: string;
  direction: 'up' | 'down' | 'neutral';
}

export interface CurvePointView {
  age: number;
  risk: number;
}

export interface AssessmentView {
  tenYearRisk: NumberView;
  lifetimeRisk: NumberView;
  category: string;
  bandIndex: number;
  highRisk: boolean;
  populationBanner: boolean;
  relativeHazard: NumberView;
  hazardBasis: string;
  factors: FactorRow[];
  posterior: PosteriorRow[];
  carrierProbability: NumberView;
  curve: CurvePointView[];
  horizons: { horizon: number; risk: NumberView }[];
  paramsVersion: string;
}

export function formatPercent(value: number, digits = 1): string {
  return `${(100 * value).toFixed(digits)}%`;
}

export function formatMultiplier(value: number): string {
  return `×${value.toFixed(3)}`;
}

function numberView(value: number, fmt: (v: number) => string): NumberView {
  return { value, display: fmt(value) };
}

export function bandIndexOf(category: string): number {
  const i = CATEGORY_BANDS.indexOf(category as (typeof CATEGORY_BANDS)[number]);
  return i >= 0 ? i : -1;
}

const POSTERIOR_LABELS: Record<string, string> = {
  '0,0': 'no major gene, no residual gene',
  '0,1': 'residual gene only',
  '1,0': 'first major gene',
  '1,1': 'first major gene + residual',
  '2,0': 'second major gene',
  '2,1': 'second major gene + residual',
};

/** An uninformative pedigree: just the assessed woman, no events, untested. */
export function pedigreeIsUninformative(request: AssessRequest): boolean {
  if (request.pedigree.length !== 1) return false;
  const p = request.pedigree[0]!;
  return p.breast_age === null && p.ovarian_age === null && p.brca_test === 'untested';
}

export function buildAssessmentView(
  response: AssessResponse,
  request: AssessRequest,
): AssessmentView {
  const a = response.assessment;
  const factors: FactorRow[] = a.relative_hazard.factors.map((f: FactorAudit) => ({
    factor: f.factor,
    multiplier: f.multiplier,
    display: formatMultiplier(f.multiplier),
    direction: f.multiplier > 1 ? 'up' : f.multiplier < 1 ? 'down' : 'neutral',
  }));
  const posterior: PosteriorRow[] = a.genotype_posterior.map((cell) => ({
    label: POSTERIOR_LABELS[`${cell.c1},${cell.c2}`] ?? `c1=${cell.c1}, c2=${cell.c2}`,
    value: cell.weight,
    display: formatPercent(cell.weight, 3),
  }));
  const carrier = a.genotype_posterior
    .filter((cell) => cell.c1 !== 0 || cell.c2 !== 0)
    .reduce((acc, cell) => acc + cell.weight, 0);
  const bandIndex = bandIndexOf(a.risk_category);
  return {
    tenYearRisk: numberView(a.ten_year_risk, formatPercent),
    lifetimeRisk: numberView(a.lifetime_risk, formatPercent),
    category: a.risk_category,
    bandIndex,
    highRisk: a.risk_category === '>=8%',
    populationBanner:
      a.relative_hazard.value === 1 && pedigreeIsUninformative(request),
    relativeHazard: numberView(a.relative_hazard.value, formatMultiplier),
    hazardBasis: a.hazard_basis,
    factors,
    posterior,
    carrierProbability: numberView(carrier, (v) => formatPercent(v, 2)),
    curve: a.risk_curve.map((pt) => ({ age: pt.age, risk: pt.risk })),
    horizons: response.horizon_risks.map((h) => ({
      horizon: h.horizon,
      risk: numberView(h.risk, formatPercent),
    })),
    paramsVersion: response.params_version,
  };
}

export interface ComparisonView {
  deltaField: string;
  before: AssessmentView;
  after: AssessmentView;
  transition: { before: string; after: string; changed: boolean };
  riskChange: NumberView;
  factorChanges: { factor: string; before: number; after: number }[];
}

export function buildComparisonView(
  base: AssessResponse,
  item: WhatIfItem,
  baseRequest: AssessRequest,
): ComparisonView {
  const before = buildAssessmentView(base, baseRequest);
  const after = buildAssessmentView(item.response, baseRequest);
  const beforeFactors = new Map(before.factors.map((f) => [f.factor, f.multiplier]));
  const factorChanges = after.factors
    .filter((f) => beforeFactors.get(f.factor) !== f.multiplier)
    .map((f) => ({
      factor: f.factor,
      before: beforeFactors.get(f.factor) ?? 1,
      after: f.multiplier,
    }));
  const change = item.response.assessment.ten_year_risk - base.assessment.ten_year_risk;
  return {
    deltaField: item.delta.field,
    before,
    after,
    transition: {
      before: item.category_transition.before,
      after: item.category_transition.after,
      changed: item.category_transition.changed,
    },
    riskChange: {
      value: change,
      display: `${change >= 0 ? '+' : ''}${(100 * change).toFixed(2)} pp`,
    },
    factorChanges,
  };
}
