#!/usr/bin/env node
/**
 * Dump frame-level SSL features (D=768) for every manifest record as FSEQ
 * files, plus a manifest whose paths point at the dumped features so the
 * primary `featgan pool` stage consumes the output directly.
 *
 * Usage:
 *   dump-ssl-features --manifest <jsonl> --out-dir <dir>
 *                     [--layer 12] [--engine stub]
 */

import { mkdirSync } from 'fs';
import path from 'path';

import { DEFAULT_CONFIG, validateConfig } from './config.js';
import { StubSslEncoder, SslEncoder } from './engines.js';
import { writeFseq } from './fseq.js';
import { readManifest, writeManifest } from './manifest.js';
import { readWav } from './wav.js';

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith('--') || i + 1 >= argv.length) {
      throw new Error(`bad argument ${argv[i]}`);
    }
    args.set(argv[i].slice(2), argv[i + 1]);
  }
  return args;
}

export function main(argv: string[]): number {
  let args: Map<string, string>;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err));
    return 2;
  }
  const manifestPath = args.get('manifest');
  const outDir = args.get('out-dir');
  if (!manifestPath || !outDir) {
    console.error(
      'usage: dump-ssl-features --manifest <jsonl> --out-dir <dir> ' +
        '[--layer 12] [--engine stub]',
    );
    return 2;
  }
  let cfg;
  try {
    cfg = validateConfig({
      ...DEFAULT_CONFIG,
      sslLayer: args.has('layer') ? Number(args.get('layer')) : DEFAULT_CONFIG.sslLayer,
      sslModel: args.get('engine') ?? DEFAULT_CONFIG.sslModel,
    });
  } catch (err) {
    console.error(String(err));
    return 2;
  }
  if (cfg.sslModel !== 'stub') {
    console.error(
      `engine ${cfg.sslModel} requires a model runtime; only the stub ` +
        'engine runs without downloads',
    );
    return 2;
  }
  const encoder: SslEncoder = new StubSslEncoder();

  try {
    const records = readManifest(manifestPath);
    mkdirSync(outDir, { recursive: true });
    const outRecords = records.map((rec) => {
      const clip = readWav(rec.path);
      if (clip.sampleRate !== 16000) {
        throw new Error(`${rec.path}: expected 16 kHz audio, got ${clip.sampleRate}`);
      }
      const seq = encoder.encode(clip, cfg.sslLayer);
      const outPath = path.join(outDir, `${rec.utterance_id}.fseq`);
      writeFseq(outPath, seq);
      return { ...rec, path: outPath };
    });
    writeManifest(outRecords, path.join(outDir, 'manifest.jsonl'));
    console.log(`dump-ssl-features: wrote ${outRecords.length} FSEQ files to ${outDir}`);
    return 0;
  } catch (err) {
    console.error(String(err));
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith('dumpSslFeatures.js')) {
  process.exit(main(process.argv.slice(2)));
}
