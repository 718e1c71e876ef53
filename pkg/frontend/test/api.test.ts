import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { buildRequest, defaultFormState } from '../src/form.js';

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

const REQUEST = buildRequest(defaultFormState());

describe('api client', () => {
  it('returns ok bodies', async () => {
    const client = new ApiClient('/v1', async () => jsonResponse(200, { hello: 1 }));
    const result = await client.assess(REQUEST);
    expect(result).toEqual({ kind: 'ok', body: { hello: 1 } });
  });

  it('maps 400 to schema errors with field paths', async () => {
    const client = new ApiClient('/v1', async () =>
      jsonResponse(400, { detail: [{ field: 'body.current_age', message: 'bad' }] }),
    );
    const result = await client.assess(REQUEST);
    expect(result.kind).toBe('schema_error');
    if (result.kind === 'schema_error') {
      expect(result.errors[0]!.field).toContain('current_age');
    }
  });

  it('maps 422 to domain errors', async () => {
    const client = new ApiClient('/v1', async () =>
      jsonResponse(422, { detail: 'pedigree contains a loop' }),
    );
    const result = await client.assess(REQUEST);
    expect(result).toEqual({ kind: 'domain_error', message: 'pedigree contains a loop' });
  });

  it('reports offline on network failure', async () => {
    const client = new ApiClient('/v1', async () => {
      throw new TypeError('network down');
    });
    const result = await client.assess(REQUEST);
    expect(result.kind).toBe('offline');
  });

  it('latest wins: an older in-flight response is superseded', async () => {
    const resolvers: Array<(r: Response) => void> = [];
    const client = new ApiClient(
      '/v1',
      () => new Promise<Response>((resolve) => resolvers.push(resolve)),
    );
    const first = client.assess(REQUEST);
    const second = client.assess(REQUEST);
    // resolve in reverse order: the older call must report superseded
    resolvers[1]!(jsonResponse(200, { which: 'second' }));
    resolvers[0]!(jsonResponse(200, { which: 'first' }));
    expect(await first).toEqual({ kind: 'superseded' });
    expect(await second).toEqual({ kind: 'ok', body: { which: 'second' } });
  });

  it('posts what-if deltas against the base', async () => {
    let captured: unknown = null;
    const client = new ApiClient('/v1', async (_url, init) => {
      captured = JSON.parse(String(init.body));
      return jsonResponse(200, { base: null, items: [], params_version: 'v' });
    });
    await client.whatif(REQUEST, [{ field: 'bmi', value: 31 }]);
    expect(captured).toEqual({ base: REQUEST, deltas: [{ field: 'bmi', value: 31 }] });
  });
});
