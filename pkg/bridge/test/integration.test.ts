/**
 * Conformance against the primary toolkit, exercised purely through its
 * external interfaces: emitted FSEQ files must round-trip bit-exactly
 * through the primary reader, and `featgan pool` must consume the dumped
 * manifest directly. Skipped when the primary CLI is not installed.
 */

import { spawnSync } from 'child_process';
import { mkdtempSync, readFileSync, writeFileSync } from 'fs';
import { tmpdir } from 'os';
import path from 'path';
import { fileURLToPath } from 'url';
import { describe, expect, it } from 'vitest';

import { readFseq, writeFseq } from '../dist/fseq.js';
import { writeManifest } from '../dist/manifest.js';
import { StubSslEncoder, StubTts } from '../dist/engines.js';
import { readWav } from '../dist/wav.js';

const here = path.dirname(fileURLToPath(import.meta.url));
const dist = path.join(here, '..', 'dist');

const havePrimary = spawnSync('featgan', ['--version'],
  { encoding: 'utf-8' }).status === 0;
const havePython = spawnSync('python3', ['-c', 'import featgan'],
  { encoding: 'utf-8' }).status === 0;

describe.skipIf(!havePython)('primary reader conformance', () => {
  it('FSEQ files round-trip bit-exactly through the primary reader', () => {
    const dir = mkdtempSync(path.join(tmpdir(), 'conf-'));
    const voice = path.join(dir, 'v.wav');
    writeFileSync(voice, Buffer.from('donor'));
    const wav = path.join(dir, 'u.wav');
    new StubTts().synthesize('yes', voice, wav);
    const seq = new StubSslEncoder().encode(readWav(wav), 12);
    const file = path.join(dir, 'u.fseq');
    writeFseq(file, seq);

    const echoed = path.join(dir, 'echo.fseq');
    const proc = spawnSync('python3', ['-c', [
      'import sys',
      'from featgan.fseq import read_fseq, write_fseq',
      'values = read_fseq(sys.argv[1])',
      `assert values.shape == (${seq.frames}, ${seq.dims}), values.shape`,
      'write_fseq(values, sys.argv[2])',
    ].join('\n'), file, echoed], { encoding: 'utf-8' });
    expect(proc.status, proc.stderr).toBe(0);
    expect(readFileSync(echoed).equals(readFileSync(file))).toBe(true);
  });
});

describe.skipIf(!havePrimary)('featgan pipeline consumes bridge output', () => {
  it('pool reads a dumped feature manifest end-to-end', () => {
    const dir = mkdtempSync(path.join(tmpdir(), 'e2e-'));
    const voice = path.join(dir, 'v.wav');
    writeFileSync(voice, Buffer.from('donor'));
    const records = ['yes', 'no', 'go'].map((word, i) => {
      const wav = path.join(dir, `u${i}.wav`);
      new StubTts().synthesize(word, voice, wav);
      return {
        utterance_id: `u${i}`,
        label: word,
        domain: 'synthetic',
        split: 'train',
        path: wav,
      };
    });
    const manifest = path.join(dir, 'audio.jsonl');
    writeManifest(records, manifest);

    const featDir = path.join(dir, 'feats');
    const dump = spawnSync('node', [path.join(dist, 'dumpSslFeatures.js'),
      '--manifest', manifest, '--out-dir', featDir], { encoding: 'utf-8' });
    expect(dump.status, dump.stderr).toBe(0);

    const archive = path.join(dir, 'pooled.fseq');
    const pool = spawnSync('featgan', ['pool',
      '--in', path.join(featDir, 'manifest.jsonl'),
      '--out', archive], { encoding: 'utf-8' });
    expect(pool.status, pool.stderr).toBe(0);

    const pooled = readFseq(archive);
    expect(pooled.frames).toBe(3);
    expect(pooled.dims).toBe(2 * 768);
  });

  it('bridge adapters drive the primary generation loop', () => {
    const dir = mkdtempSync(path.join(tmpdir(), 'loop-'));
    const donors = path.join(dir, 'donors.jsonl');
    const donorLines: string[] = [];
    for (let i = 0; i < 8; i++) {
      const dv = path.join(dir, `d${i}.wav`);
      writeFileSync(dv, Buffer.from(`donor-${i}`));
      donorLines.push(JSON.stringify({
        utterance_id: `d${i}`, speaker_id: `s${i}`, path: dv,
      }));
    }
    writeFileSync(donors, donorLines.join('\n') + '\n');

    const synthCmd = `node ${path.join(dist, 'synthesize.js')} ` +
      '--text {text} --voice {voice_path} --out {out_path}';
    const asrCmd = `node ${path.join(dist, 'transcribe.js')} {in_path}`;
    const loop = spawnSync('featgan', ['filter-loop',
      '--targets', 'yes=2,no=1',
      '--voices', donors,
      '--synth-cmd', synthCmd,
      '--asr1-cmd', asrCmd,
      '--asr2-cmd', asrCmd,
      '--out-dir', path.join(dir, 'gen'),
      '--seed', '5'], { encoding: 'utf-8' });
    expect(loop.status, loop.stderr).toBe(0);
    expect(loop.stdout).toMatch(/kept 3\/3/);
    const kept = readFileSync(path.join(dir, 'gen', 'kept.jsonl'), 'utf-8')
      .trim().split('\n');
    expect(kept.length).toBe(3);
  });
});
