/**
 * Thin API client with latest-wins request handling and an offline mode
 * that keeps the last result visible behind a stale badge.
 */

import type {
  AssessRequest,
  AssessResponse,
  FieldError,
  WhatIfDelta,
  WhatIfResponse,
} from './types.js';

export type ApiResult<T> =
  | { kind: 'ok'; body: T }
  | { kind: 'schema_error'; errors: FieldError[] }
  | { kind: 'domain_error'; message: string }
  | { kind: 'offline' }
  | { kind: 'superseded' };

export type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;
  private requestToken = 0;

  constructor(baseUrl = '/v1', fetchImpl: FetchLike = (u, i) => fetch(u, i)) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.fetchImpl = fetchImpl;
  }

  /** Issue a POST; if a newer call started meanwhile, report superseded. */
  private async post<T>(path: string, body: unknown): Promise<ApiResult<T>> {
    this.requestToken += 1;
    const token = this.requestToken;
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(body),
      });
    } catch {
      return token === this.requestToken ? { kind: 'offline' } : { kind: 'superseded' };
    }
    if (token !== this.requestToken) return { kind: 'superseded' };
    if (response.status === 400) {
      const payload = (await response.json()) as { detail: FieldError[] };
      return { kind: 'schema_error', errors: payload.detail };
    }
    if (response.status === 422) {
      const payload = (await response.json()) as { detail: string };
      return { kind: 'domain_error', message: payload.detail };
    }
    if (!response.ok) {
      return { kind: 'domain_error', message: `server error ${response.status}` };
    }
    return { kind: 'ok', body: (await response.json()) as T };
  }

  assess(request: AssessRequest): Promise<ApiResult<AssessResponse>> {
    return this.post<AssessResponse>('/assess', request);
  }

  whatif(
    base: AssessRequest,
    deltas: WhatIfDelta[],
  ): Promise<ApiResult<WhatIfResponse>> {
    return this.post<WhatIfResponse>('/whatif', { base, deltas });
  }
}
