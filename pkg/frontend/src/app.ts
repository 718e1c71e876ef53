/**
 * DOM wiring: form panel, pedigree editor, results, what-if toggles.
 *
 * Every rendered number carries the exact response value in a
 * ``data-exact`` attribute next to its formatted text, so displayed
 * values are verifiably those of the API response.
 */

import { ApiClient, ApiResult } from './api.js';
import {
  FormState,
  addRelative,
  buildRequest,
  defaultFormState,
  removeRelative,
  updateRelative,
  validateForm,
} from './form.js';
import { DEFAULT_LAYOUT, riskCurveGeometry } from './chart.js';
import type { AssessRequest, AssessResponse, BrcaTest } from './types.js';
import {
  AssessmentView,
  CATEGORY_BANDS,
  buildAssessmentView,
  buildComparisonView,
} from './view.js';
import { TOGGLES, WhatIfHistory, toggleById } from './whatif.js';

interface AppState {
  form: FormState;
  lastResponse: AssessResponse | null;
  lastRequest: AssessRequest | null;
  stale: boolean;
  history: WhatIfHistory;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function numberCell(value: number, display: string): string {
  return `<span data-exact="${value}">${display}</span>`;
}

export class App {
  private state: AppState = {
    form: defaultFormState(),
    lastResponse: null,
    lastRequest: null,
    stale: false,
    history: new WhatIfHistory(),
  };

  constructor(private readonly api: ApiClient) {}

  start(): void {
    this.renderForm();
    this.renderToggles();
    el('assess-button').addEventListener('click', () => void this.submit());
    el('add-relative').addEventListener('click', () => {
      this.state.form = addRelative(this.state.form, 'F');
      this.renderForm();
    });
    void this.submit();
  }

  // -- form ------------------------------------------------------------

  private readNumber(id: string): number | null {
    const raw = (el<HTMLInputElement>(id)).value.trim();
    return raw === '' ? null : Number(raw);
  }

  private readSelect(id: string): string | null {
    const raw = (el<HTMLSelectElement>(id)).value;
    return raw === '' ? null : raw;
  }

  private collectForm(): FormState {
    const form = this.state.form;
    const parityRaw = this.readSelect('f-parity');
    const profile = {
      ...form.profile,
      menarche_age: this.readNumber('f-menarche'),
      parity:
        parityRaw === null
          ? null
          : parityRaw === 'nulliparous'
            ? ('nulliparous' as const)
            : this.readNumber('f-first-birth'),
      menopause_status: this.readSelect('f-menopause') as 'pre' | 'post' | null,
      menopause_age: this.readNumber('f-menopause-age'),
      height_m: this.readNumber('f-height'),
      bmi: this.readNumber('f-bmi'),
      hrt_status: this.readSelect('f-hrt-status') as 'never' | 'current' | 'past' | null,
      hrt_type: this.readSelect('f-hrt-type') as 'estrogen_only' | 'combined' | null,
      hrt_years: this.readNumber('f-hrt-years'),
      benign_disease: (this.readSelect('f-benign') ?? 'none_known') as FormState['profile']['benign_disease'],
      density_measure: this.readSelect('f-density-measure') as FormState['profile']['density_measure'],
      density_value: this.readNumber('f-density-value'),
      density_age: this.readNumber('f-density-age'),
      density_bmi: this.readNumber('f-density-bmi'),
    };
    const currentAge = this.readNumber('f-age') ?? form.currentAge;
    const proband = { ...form.pedigree[0]!, censor_age: currentAge };
    return {
      ...form,
      profile,
      currentAge,
      pedigree: [proband, ...form.pedigree.slice(1)],
    };
  }

  private renderForm(): void {
    const container = el('pedigree-rows');
    container.innerHTML = '';
    for (const member of this.state.form.pedigree) {
      const row = document.createElement('div');
      row.className = 'pedigree-row';
      const isProband = member.id === this.state.form.pedigree[0]!.id;
      row.innerHTML = `
        <strong>${member.id}</strong>
        <label>sex <select data-field="sex" ${isProband ? 'disabled' : ''}>
          <option value="F" ${member.sex === 'F' ? 'selected' : ''}>F</option>
          <option value="M" ${member.sex === 'M' ? 'selected' : ''}>M</option>
        </select></label>
        <label>mother <input data-field="mother_id" size="6" value="${member.mother_id ?? ''}"></label>
        <label>father <input data-field="father_id" size="6" value="${member.father_id ?? ''}"></label>
        <label>breast ca. age <input data-field="breast_age" size="4" value="${member.breast_age ?? ''}" ${isProband ? 'disabled' : ''}></label>
        <label>ovarian ca. age <input data-field="ovarian_age" size="4" value="${member.ovarian_age ?? ''}"></label>
        <label>current/censor age <input data-field="censor_age" size="4" value="${member.censor_age}"></label>
        <label>gene test <select data-field="brca_test">
          ${['untested', 'negative', 'brca1', 'brca2']
            .map((t) => `<option value="${t}" ${member.brca_test === t ? 'selected' : ''}>${t}</option>`)
            .join('')}
        </select></label>
        ${isProband ? '' : '<button type="button" data-action="remove">remove</button>'}
      `;
      row.querySelectorAll('[data-field]').forEach((input) => {
        input.addEventListener('change', () => {
          const field = (input as HTMLElement).dataset['field']!;
          const raw = (input as HTMLInputElement | HTMLSelectElement).value.trim();
          const numeric = ['breast_age', 'ovarian_age', 'censor_age'].includes(field);
          const idFields = ['mother_id', 'father_id'].includes(field);
          const value = numeric
            ? raw === ''
              ? null
              : Number(raw)
            : idFields
              ? raw || null
              : (raw as BrcaTest);
          this.state.form = updateRelative(this.state.form, member.id, {
            [field]: value,
          } as never);
        });
      });
      const remove = row.querySelector('[data-action="remove"]');
      if (remove) {
        remove.addEventListener('click', () => {
          this.state.form = removeRelative(this.state.form, member.id);
          this.renderForm();
        });
      }
      container.appendChild(row);
    }
  }

  private renderToggles(): void {
    const container = el('whatif-toggles');
    container.innerHTML = '';
    for (const toggle of TOGGLES) {
      const button = document.createElement('button');
      button.type = 'button';
      button.textContent = toggle.label;
      button.addEventListener('click', () => void this.runWhatIf(toggle.id));
      container.appendChild(button);
    }
  }

  // -- submission --------------------------------------------------------

  private showErrors(errors: Record<string, string>): void {
    const box = el('form-errors');
    box.innerHTML = Object.entries(errors)
      .map(([field, message]) => `<div class="field-error" data-field="${field}">${field}: ${message}</div>`)
      .join('');
  }

  private async submit(): Promise<void> {
    this.state.form = this.collectForm();
    const errors = validateForm(this.state.form);
    this.showErrors(errors);
    if (Object.keys(errors).length > 0) return;
    const request = buildRequest(this.state.form);
    const result = await this.api.assess(request);
    this.applyResult(result, request);
  }

  private applyResult(result: ApiResult<AssessResponse>, request: AssessRequest): void {
    switch (result.kind) {
      case 'ok':
        this.state.lastResponse = result.body;
        this.state.lastRequest = request;
        this.state.stale = false;
        this.renderAssessment(buildAssessmentView(result.body, request));
        break;
      case 'schema_error':
        this.showErrors(
          Object.fromEntries(result.errors.map((e) => [e.field, e.message])),
        );
        break;
      case 'domain_error':
        this.showErrors({ request: result.message });
        break;
      case 'offline':
        this.state.stale = true;
        this.renderStaleBadge();
        break;
      case 'superseded':
        break;
    }
  }

  private renderStaleBadge(): void {
    el('stale-badge').style.display = this.state.stale ? 'inline-block' : 'none';
  }

  private renderAssessment(view: AssessmentView): void {
    this.renderStaleBadge();
    el('population-banner').style.display = view.populationBanner ? 'block' : 'none';
    el('risk-ten-year').innerHTML = numberCell(
      view.tenYearRisk.value,
      view.tenYearRisk.display,
    );
    el('risk-lifetime').innerHTML = numberCell(
      view.lifetimeRisk.value,
      view.lifetimeRisk.display,
    );
    el('relative-hazard').innerHTML = numberCell(
      view.relativeHazard.value,
      view.relativeHazard.display,
    );
    el('params-version').textContent = view.paramsVersion;

    const bands = el('category-bands');
    bands.innerHTML = CATEGORY_BANDS.map(
      (label, i) =>
        `<span class="band ${i === view.bandIndex ? 'active' : ''} ${
          i === view.bandIndex && view.highRisk ? 'high' : ''
        }">${label}</span>`,
    ).join('');

    const waterfall = el('factor-waterfall');
    waterfall.innerHTML = view.factors
      .map(
        (f) => `
        <div class="factor-row ${f.direction}">
          <span class="name">${f.factor}</span>
          ${numberCell(f.multiplier, f.display)}
        </div>`,
      )
      .join('');

    el('posterior-summary').innerHTML =
      `<div>carrier probability ${numberCell(
        view.carrierProbability.value,
        view.carrierProbability.display,
      )}</div>` +
      view.posterior
        .map((c) => `<div class="cell">${c.label}: ${numberCell(c.value, c.display)}</div>`)
        .join('');

    const geometry = riskCurveGeometry(view.curve);
    const svg = el('risk-curve');
    svg.innerHTML = `
      <path d="${geometry.path}" fill="none" stroke="#b5186d" stroke-width="2"/>
      ${geometry.xTicks
        .map(
          (t) =>
            `<text x="${t.x}" y="${DEFAULT_LAYOUT.height - 8}" class="tick">${t.label}</text>`,
        )
        .join('')}
      ${geometry.yTicks
        .map((t) => `<text x="4" y="${t.y}" class="tick">${t.label}</text>`)
        .join('')}
    `;
  }

  // -- what-if -----------------------------------------------------------

  private async runWhatIf(toggleId: string): Promise<void> {
    if (!this.state.lastRequest || !this.state.lastResponse) return;
    const base = this.state.lastRequest;
    const toggle = toggleById(toggleId);
    const result = await this.api.whatif(base, [toggle.build(base)]);
    if (result.kind === 'offline') {
      this.state.stale = true;
      this.renderStaleBadge();
      return;
    }
    if (result.kind !== 'ok') {
      if (result.kind === 'domain_error') this.showErrors({ whatif: result.message });
      return;
    }
    const item = result.body.items[0];
    if (!item) return;
    const comparison = buildComparisonView(result.body.base, item, base);
    this.state.history.add({ toggleId, label: toggle.label, comparison });
    this.renderHistory();
  }

  private renderHistory(): void {
    const container = el('whatif-history');
    container.innerHTML = this.state.history
      .list()
      .map(
        (entry) => `
        <div class="history-entry">
          <strong>${entry.label}</strong>:
          ${numberCell(
            entry.comparison.before.tenYearRisk.value,
            entry.comparison.before.tenYearRisk.display,
          )}
          →
          ${numberCell(
            entry.comparison.after.tenYearRisk.value,
            entry.comparison.after.tenYearRisk.display,
          )}
          (${entry.comparison.riskChange.display})
          ${
            entry.comparison.transition.changed
              ? `<span class="transition">${entry.comparison.transition.before} → ${entry.comparison.transition.after}</span>`
              : ''
          }
        </div>`,
      )
      .join('');
  }
}
