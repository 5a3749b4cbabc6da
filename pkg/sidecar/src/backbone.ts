/**
 * Chunk backbones: map text to a fixed-width feature vector ([CLS]-style)
 * or a machine-class probability.
 *
 * `hash` is a dependency-free deterministic backbone for offline runs and
 * protocol tests; it carries no detection power claims.  Any Hugging Face
 * checkpoint id selects the transformer backbone instead, which returns
 * the final-layer hidden state at the classification token and the
 * classifier's machine-class probability.
 */

import { crc32 } from 'node:zlib';

export interface Backbone {
  readonly name: string;
  readonly featureDim: number;
  features(texts: string[]): Promise<number[][]>;
  scores(texts: string[]): Promise<number[]>;
}

function unit(text: string, salt: string): number {
  return (crc32(`${salt}${text}`) >>> 0) / 0xffffffff;
}

export class HashBackbone implements Backbone {
  readonly name: string;

  constructor(readonly featureDim: number = 1024, name = 'hash-backbone') {
    if (featureDim < 1) {
      throw new Error(`feature dim must be positive, got ${featureDim}`);
    }
    this.name = name;
  }

  async features(texts: string[]): Promise<number[][]> {
    return texts.map((text) => {
      const row = new Array<number>(this.featureDim);
      for (let i = 0; i < this.featureDim; i++) {
        row[i] = unit(text, String(i)) * 2 - 1;
      }
      return row;
    });
  }

  async scores(texts: string[]): Promise<number[]> {
    return texts.map((text) => unit(text, 'score'));
  }
}

interface TransformersBackboneOptions {
  /** substrings that identify the machine/generated class label */
  positiveLabelHints?: string[];
  device?: string;
  batchSize?: number;
}

export class TransformersBackbone implements Backbone {
  readonly name: string;
  readonly featureDim: number;
  private readonly extractor: any;
  private readonly classifier: any;
  private readonly hints: string[];
  private readonly batchSize: number;

  private constructor(
    name: string,
    featureDim: number,
    extractor: any,
    classifier: any,
    options: TransformersBackboneOptions,
  ) {
    this.name = name;
    this.featureDim = featureDim;
    this.extractor = extractor;
    this.classifier = classifier;
    this.hints = (options.positiveLabelHints ?? ['fake', 'machine', 'generated', 'label_1']).map(
      (h) => h.toLowerCase(),
    );
    this.batchSize = options.batchSize ?? 8;
  }

  /** Loads the checkpoint; rejects (so the caller can exit nonzero) on failure. */
  static async load(
    checkpoint: string,
    options: TransformersBackboneOptions = {},
  ): Promise<TransformersBackbone> {
    const { pipeline } = await import('@huggingface/transformers');
    const device = options.device as any;
    const extractor = await pipeline('feature-extraction', checkpoint, { device });
    let classifier: any = null;
    try {
      classifier = await pipeline('text-classification', checkpoint, { device });
    } catch {
      classifier = null; // feature-only checkpoints still serve mode=feature
    }
    const probe = await extractor('probe', { pooling: 'none' });
    const dims = probe.dims as number[];
    const featureDim = dims[dims.length - 1];
    return new TransformersBackbone(checkpoint, featureDim, extractor, classifier, options);
  }

  async features(texts: string[]): Promise<number[][]> {
    const rows: number[][] = [];
    for (let start = 0; start < texts.length; start += this.batchSize) {
      const batch = texts.slice(start, start + this.batchSize);
      for (const text of batch) {
        // [tokens, dim]; row 0 is the classification token
        const output = await this.extractor(text, { pooling: 'none' });
        const dims = output.dims as number[];
        const width = dims[dims.length - 1];
        const data = output.data as Float32Array;
        rows.push(Array.from(data.slice(0, width)));
      }
    }
    return rows;
  }

  async scores(texts: string[]): Promise<number[]> {
    if (this.classifier === null) {
      throw new Error(`checkpoint ${this.name} has no classification head`);
    }
    const out: number[] = [];
    for (const text of texts) {
      const preds = await this.classifier(text, { top_k: null });
      const list: Array<{ label: string; score: number }> = Array.isArray(preds[0])
        ? preds[0]
        : preds;
      const positive = list.find((p) =>
        this.hints.some((hint) => p.label.toLowerCase().includes(hint)),
      );
      out.push(positive ? positive.score : 1 - list[0].score);
    }
    return out;
  }
}

export async function loadBackbone(
  spec: string,
  featureDim: number,
  options: TransformersBackboneOptions = {},
): Promise<Backbone> {
  if (spec === 'hash') {
    return new HashBackbone(featureDim);
  }
  return TransformersBackbone.load(spec, options);
}
