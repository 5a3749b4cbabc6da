/**
 * Entry point: serve the scorer protocol on stdio (default) or TCP.
 *
 *   node dist/main.js [--backbone hash|<hf-checkpoint>] [--feature-dim N]
 *                     [--max-tokens N] [--batch-size N] [--device D]
 *                     [--name NAME] [--tcp PORT]
 *
 * A backbone that fails to load exits nonzero before any handshake.
 */

import { createServer } from 'node:net';
import process from 'node:process';

import { loadBackbone } from './backbone.js';
import { serve } from './serve.js';

interface Args {
  backbone: string;
  featureDim: number;
  maxTokens: number;
  batchSize: number;
  device?: string;
  tcpPort?: number;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { backbone: 'hash', featureDim: 1024, maxTokens: 512, batchSize: 8 };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) {
        throw new Error(`missing value for ${flag}`);
      }
      return argv[i];
    };
    switch (flag) {
      case '--backbone':
        args.backbone = next();
        break;
      case '--feature-dim':
        args.featureDim = Number(next());
        break;
      case '--max-tokens':
        args.maxTokens = Number(next());
        break;
      case '--batch-size':
        args.batchSize = Number(next());
        break;
      case '--device':
        args.device = next();
        break;
      case '--tcp':
        args.tcpPort = Number(next());
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!Number.isFinite(args.featureDim) || args.featureDim < 1) {
    throw new Error('--feature-dim must be a positive integer');
  }
  if (!Number.isFinite(args.maxTokens) || args.maxTokens < 1) {
    throw new Error('--max-tokens must be a positive integer');
  }
  return args;
}

async function main(): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    process.stderr.write(`usage error: ${err instanceof Error ? err.message : err}\n`);
    return 2;
  }

  let backbone;
  try {
    backbone = await loadBackbone(args.backbone, args.featureDim, {
      device: args.device,
      batchSize: args.batchSize,
    });
  } catch (err) {
    process.stderr.write(
      `failed to load backbone ${args.backbone}: ${err instanceof Error ? err.message : err}\n`,
    );
    return 1;
  }
  const config = { backbone, maxTokens: args.maxTokens };

  if (args.tcpPort !== undefined) {
    const server = createServer((socket) => {
      serve(socket, socket, config).catch((err) => {
        process.stderr.write(`connection error: ${err}\n`);
        socket.destroy();
      });
    });
    await new Promise<void>((resolve) => server.listen(args.tcpPort, resolve));
    process.stderr.write(`listening on tcp port ${args.tcpPort}\n`);
    await new Promise(() => undefined); // run until killed
    return 0;
  }

  await serve(process.stdin, process.stdout, config);
  return 0;
}

main().then(
  (code) => {
    if (code !== 0) {
      process.exitCode = code;
    }
  },
  (err) => {
    process.stderr.write(`fatal: ${err}\n`);
    process.exitCode = 1;
  },
);
