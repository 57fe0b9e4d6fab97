/** Minimal PCM16 mono WAV read/write (16 kHz pipeline audio). */

import { readFileSync, writeFileSync } from 'fs';

export interface AudioClip {
  sampleRate: number;
  /** float samples in [-1, 1] */
  samples: Float32Array;
}

export function encodeWav(clip: AudioClip): Buffer {
  const n = clip.samples.length;
  const dataSize = n * 2;
  const buf = Buffer.alloc(44 + dataSize);
  buf.write('RIFF', 0, 'ascii');
  buf.writeUInt32LE(36 + dataSize, 4);
  buf.write('WAVE', 8, 'ascii');
  buf.write('fmt ', 12, 'ascii');
  buf.writeUInt32LE(16, 16); // PCM fmt chunk size
  buf.writeUInt16LE(1, 20); // PCM
  buf.writeUInt16LE(1, 22); // mono
  buf.writeUInt32LE(clip.sampleRate, 24);
  buf.writeUInt32LE(clip.sampleRate * 2, 28); // byte rate
  buf.writeUInt16LE(2, 32); // block align
  buf.writeUInt16LE(16, 34); // bits per sample
  buf.write('data', 36, 'ascii');
  buf.writeUInt32LE(dataSize, 40);
  for (let i = 0; i < n; i++) {
    const clamped = Math.max(-1, Math.min(1, clip.samples[i]));
    buf.writeInt16LE(Math.round(clamped * 32767), 44 + 2 * i);
  }
  return buf;
}

export function decodeWav(buf: Buffer, label = 'buffer'): AudioClip {
  if (buf.length < 44 || buf.toString('ascii', 0, 4) !== 'RIFF'
      || buf.toString('ascii', 8, 12) !== 'WAVE') {
    throw new Error(`${label}: not a RIFF/WAVE file`);
  }
  // Walk chunks: fmt then data (other chunks are skipped).
  let pos = 12;
  let sampleRate = 0;
  let channels = 1;
  let bits = 16;
  let data: Buffer | null = null;
  while (pos + 8 <= buf.length) {
    const id = buf.toString('ascii', pos, pos + 4);
    const size = buf.readUInt32LE(pos + 4);
    const body = buf.subarray(pos + 8, pos + 8 + size);
    if (id === 'fmt ') {
      const format = body.readUInt16LE(0);
      if (format !== 1) throw new Error(`${label}: only PCM WAV supported`);
      channels = body.readUInt16LE(2);
      sampleRate = body.readUInt32LE(4);
      bits = body.readUInt16LE(14);
    } else if (id === 'data') {
      data = body;
    }
    pos += 8 + size + (size % 2);
  }
  if (!sampleRate || !data) throw new Error(`${label}: missing fmt/data chunk`);
  if (bits !== 16) throw new Error(`${label}: only PCM16 supported`);
  const frameCount = Math.floor(data.length / (2 * channels));
  const samples = new Float32Array(frameCount);
  for (let i = 0; i < frameCount; i++) {
    let acc = 0;
    for (let c = 0; c < channels; c++) {
      acc += data.readInt16LE(2 * (i * channels + c));
    }
    samples[i] = acc / channels / 32768;
  }
  return { sampleRate, samples };
}

export function writeWav(path: string, clip: AudioClip): void {
  writeFileSync(path, encodeWav(clip));
}

export function readWav(path: string): AudioClip {
  return decodeWav(readFileSync(path), path);
}
