/**
 * What-if toggles: named deltas applied server-side against the base
 * request, plus the in-session history of explored scenarios.
 */

import type { AssessRequest, WhatIfDelta } from './types.js';
import type { ComparisonView } from './view.js';
import { PROBAND_ID } from './form.js';

export interface WhatIfToggle {
  id: string;
  label: string;
  build: (base: AssessRequest) => WhatIfDelta;
}

export const TOGGLES: WhatIfToggle[] = [
  {
    id: 'hrt_combined_y3',
    label: 'Hormone therapy: combined, year 3',
    build: (base) => ({
      field: 'profile',
      value: {
        ...base.profile,
        hrt_status: 'current',
        hrt_type: 'combined',
        hrt_years: 3,
      },
    }),
  },
  {
    id: 'hrt_off',
    label: 'Hormone therapy: never',
    build: (base) => ({
      field: 'profile',
      value: { ...base.profile, hrt_status: 'never', hrt_type: null, hrt_years: null },
    }),
  },
  {
    id: 'benign_ah',
    label: 'Benign disease: atypical hyperplasia',
    build: () => ({ field: 'benign_disease', value: 'atypical_hyperplasia' }),
  },
  {
    id: 'mother_bc_40',
    label: 'Add mother with breast cancer at 40',
    build: (base) => ({
      field: 'pedigree',
      value: [
        { ...base.pedigree[0]!, mother_id: '_whatif_mum' },
        ...base.pedigree.slice(1),
        {
          id: '_whatif_mum',
          sex: 'F',
          mother_id: null,
          father_id: null,
          breast_age: 40,
          ovarian_age: null,
          censor_age: 62,
          brca_test: 'untested',
        },
      ],
    }),
  },
  {
    id: 'clear_inputs',
    label: 'Remove all inputs (population risk)',
    build: (base) => ({
      field: 'profile',
      value: {
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
      },
    }),
  },
];

export function toggleById(id: string): WhatIfToggle {
  const toggle = TOGGLES.find((t) => t.id === id);
  if (!toggle) throw new Error(`unknown what-if toggle '${id}'`);
  return toggle;
}

export interface HistoryEntry {
  toggleId: string;
  label: string;
  comparison: ComparisonView;
}

/** In-session scenario history; nothing persists beyond the page. */
export class WhatIfHistory {
  private entries: HistoryEntry[] = [];

  add(entry: HistoryEntry): void {
    this.entries = [entry, ...this.entries];
  }

  list(): readonly HistoryEntry[] {
    return this.entries;
  }

  clear(): void {
    this.entries = [];
  }
}

export function probandOf(base: AssessRequest) {
  return base.pedigree.find((m) => m.id === PROBAND_ID) ?? base.pedigree[0]!;
}
