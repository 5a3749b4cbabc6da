import { describe, expect, it } from 'vitest';

import { HashBackbone } from '../dist/backbone.js';
import { handleLine, handshakeLine } from '../dist/serve.js';

const config = { backbone: new HashBackbone(32), maxTokens: 512 };

describe('handshake', () => {
  it('reports readiness, feature width, and backbone name', () => {
    const handshake = JSON.parse(handshakeLine(config));
    expect(handshake).toEqual({ ready: true, feature_dim: 32, name: 'hash-backbone' });
  });
});

describe('handleLine', () => {
  it('ignores blank lines', async () => {
    expect(await handleLine('', config)).toBeNull();
    expect(await handleLine('   \t ', config)).toBeNull();
  });

  it('serves scores in [0, 1], one per text', async () => {
    const reply = (await handleLine(
      '{"id": "s1", "mode": "score", "texts": ["alpha", "beta"]}',
      config,
    )) as { id: string; scores: number[] };
    expect(reply.id).toBe('s1');
    expect(reply.scores).toHaveLength(2);
    for (const s of reply.scores) {
      expect(s).toBeGreaterThanOrEqual(0);
      expect(s).toBeLessThanOrEqual(1);
    }
  });

  it('serves features at the handshake width', async () => {
    const reply = (await handleLine(
      '{"id": "f1", "mode": "feature", "texts": ["alpha"]}',
      config,
    )) as { id: string; features: number[][] };
    expect(reply.features).toHaveLength(1);
    expect(reply.features[0]).toHaveLength(32);
  });

  it('is deterministic and order-preserving', async () => {
    const forward = (await handleLine(
      '{"id": "d1", "mode": "feature", "texts": ["one", "two", "three"]}',
      config,
    )) as { features: number[][] };
    const again = (await handleLine(
      '{"id": "d2", "mode": "feature", "texts": ["one", "two", "three"]}',
      config,
    )) as { features: number[][] };
    const reversed = (await handleLine(
      '{"id": "d3", "mode": "feature", "texts": ["three", "two", "one"]}',
      config,
    )) as { features: number[][] };
    expect(again.features).toEqual(forward.features);
    expect(reversed.features).toEqual([...forward.features].reverse());
  });

  it('reports malformed lines as error objects and keeps serving', async () => {
    const bad = (await handleLine('garbage {{{', config)) as { id: null; error: string };
    expect(bad.id).toBeNull();
    expect(bad.error).toMatch(/JSON/);

    const badMode = (await handleLine(
      '{"id": "e1", "mode": "levitate", "texts": ["x"]}',
      config,
    )) as { id: string; error: string };
    expect(badMode.id).toBe('e1');
    expect(badMode.error).toBeTruthy();

    const ok = await handleLine('{"id": "e2", "mode": "score", "texts": ["x"]}', config);
    expect(ok).toHaveProperty('scores');
  });

  it('truncates texts before scoring', async () => {
    const long = Array.from({ length: 2000 }, (_, i) => `w${i}`).join(' ');
    const short = long.split(' ').slice(0, 512).join(' ');
    const a = (await handleLine(
      JSON.stringify({ id: 't1', mode: 'score', texts: [long] }),
      config,
    )) as { scores: number[] };
    const b = (await handleLine(
      JSON.stringify({ id: 't2', mode: 'score', texts: [short] }),
      config,
    )) as { scores: number[] };
    expect(a.scores).toEqual(b.scores);
  });
});
