/**
 * Engine adapters.
 *
 * Real model runtimes (transformer SSL encoders, large-vocabulary ASR,
 * voice-cloning TTS) are reached through external commands that honor the
 * primary toolkit's template contract. The stub engines are deterministic
 * stand-ins used by CI and mini-runs: no downloads, byte-stable outputs.
 */

import { existsSync, readFileSync, writeFileSync } from 'fs';
import { spawnSync } from 'child_process';

import { AudioClip, writeWav } from './wav.js';
import { FeatureSequence } from './fseq.js';

export const SSL_DIM = 768;
/** Conv frontend geometry of the SSL encoder: 25 ms window, 20 ms hop. */
export const SSL_WINDOW = 400;
export const SSL_HOP = 320;

export function sslFrameCount(sampleCount: number): number {
  if (sampleCount < SSL_WINDOW) return 0;
  return Math.floor((sampleCount - SSL_WINDOW) / SSL_HOP) + 1;
}

// --- deterministic helpers -------------------------------------------------

export function fnv1a32(data: Buffer | string): number {
  const bytes = typeof data === 'string' ? Buffer.from(data, 'utf-8') : data;
  let h = 0x811c9dc5;
  for (const b of bytes) {
    h ^= b;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

/** mulberry32 PRNG; tiny, seedable, good enough for stub features. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

// --- interfaces -------------------------------------------------------------

export interface SslEncoder {
  encode(clip: AudioClip, layer: number): FeatureSequence;
}

export interface AsrEngine {
  transcribe(audioPath: string): string;
}

export interface TtsEngine {
  synthesize(text: string, voicePath: string, outPath: string): void;
}

// --- stub engines -----------------------------------------------------------

export class StubSslEncoder implements SslEncoder {
  /**
   * Frame geometry matches the real encoder (a 1 s 16 kHz clip gives 49
   * frames); values are a deterministic hash-seeded stream biased by the
   * local audio energy so different clips produce different features.
   */
  encode(clip: AudioClip, layer: number): FeatureSequence {
    const frames = sslFrameCount(clip.samples.length);
    if (frames === 0) {
      throw new Error(
        `clip of ${clip.samples.length} samples is shorter than one frame`,
      );
    }
    const values = new Float32Array(frames * SSL_DIM);
    const contentHash = fnv1a32(Buffer.from(clip.samples.buffer,
      clip.samples.byteOffset, clip.samples.byteLength));
    for (let t = 0; t < frames; t++) {
      let energy = 0;
      const start = t * SSL_HOP;
      for (let i = start; i < start + SSL_WINDOW; i++) {
        energy += clip.samples[i] * clip.samples[i];
      }
      energy /= SSL_WINDOW;
      const rand = mulberry32((contentHash ^ Math.imul(layer, 0x9e3779b9)
        ^ Math.imul(t + 1, 0x85ebca6b)) >>> 0);
      for (let d = 0; d < SSL_DIM; d++) {
        values[t * SSL_DIM + d] = (rand() * 2 - 1) + energy;
      }
    }
    return { frames, dims: SSL_DIM, values };
  }
}

export class StubAsr implements AsrEngine {
  /**
   * Sidecar protocol: a `<audio>.txt` file next to the clip carries the
   * ground-truth text (the stub TTS writes one). Near-silent clips yield
   * an empty hypothesis, as a real recognizer would.
   */
  transcribe(audioPath: string): string {
    if (!existsSync(audioPath)) {
      throw new Error(`${audioPath}: no such audio file`);
    }
    const sidecar = audioPath + '.txt';
    if (existsSync(sidecar)) {
      return readFileSync(sidecar, 'utf-8').trim();
    }
    return '';
  }
}

export class StubTts implements TtsEngine {
  /**
   * Writes a 16 kHz mono tone whose frequency mixes the text hash with a
   * voice hash (file bytes when readable, else the path), so two donors
   * produce different waveforms. A sidecar `<out>.txt` carries the text
   * for the stub recognizer.
   */
  synthesize(text: string, voicePath: string, outPath: string): void {
    const voiceHash = existsSync(voicePath)
      ? fnv1a32(readFileSync(voicePath))
      : fnv1a32(voicePath);
    const freq = 200 + ((fnv1a32(text) ^ voiceHash) % 2800);
    const n = Math.round(0.8 * 16000);
    const samples = new Float32Array(n);
    for (let i = 0; i < n; i++) {
      samples[i] = 0.4 * Math.sin((2 * Math.PI * freq * i) / 16000);
    }
    writeWav(outPath, { sampleRate: 16000, samples });
    writeFileSync(outPath + '.txt', text, 'utf-8');
  }
}

// --- external command engines ------------------------------------------------

/** Split a command template on whitespace, honoring single/double quotes. */
export function tokenize(template: string): string[] {
  const tokens: string[] = [];
  let current = '';
  let quote: string | null = null;
  let pending = false;
  for (const ch of template) {
    if (quote) {
      if (ch === quote) quote = null;
      else current += ch;
    } else if (ch === '"' || ch === "'") {
      quote = ch;
      pending = true;
    } else if (ch === ' ' || ch === '\t') {
      if (current || pending) tokens.push(current);
      current = '';
      pending = false;
    } else {
      current += ch;
    }
  }
  if (quote) throw new Error(`unbalanced quote in template: ${template}`);
  if (current || pending) tokens.push(current);
  return tokens;
}

export function runTemplate(
  template: string,
  substitutions: Record<string, string>,
): { stdout: string; stderr: string } {
  const tokens = tokenize(template).map((tok) => {
    let out = tok;
    for (const [key, value] of Object.entries(substitutions)) {
      out = out.split(`{${key}}`).join(value);
    }
    return out;
  });
  const proc = spawnSync(tokens[0], tokens.slice(1), { encoding: 'utf-8' });
  if (proc.error) throw proc.error;
  if (proc.status !== 0) {
    throw new Error(
      `command exited ${proc.status}: ${(proc.stderr ?? '').trim()}`,
    );
  }
  return { stdout: proc.stdout ?? '', stderr: proc.stderr ?? '' };
}

export function finalStdoutLine(stdout: string): string {
  const lines = stdout.split('\n');
  while (lines.length && lines[lines.length - 1] === '') lines.pop();
  return lines.length ? lines[lines.length - 1] : '';
}

export class CommandAsr implements AsrEngine {
  constructor(private template: string) {}

  transcribe(audioPath: string): string {
    const { stdout } = runTemplate(this.template, { in_path: audioPath });
    return finalStdoutLine(stdout);
  }
}

export class CommandTts implements TtsEngine {
  constructor(private template: string) {}

  synthesize(text: string, voicePath: string, outPath: string): void {
    runTemplate(this.template, {
      text,
      voice_path: voicePath,
      out_path: outPath,
    });
  }
}
