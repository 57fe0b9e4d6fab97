/**
 * FSEQ binary feature-sequence files.
 *
 * Layout: magic "FSEQ", version u32 LE = 1, frame count T u32 LE,
 * dimension D u32 LE, then T*D float32 LE values row-major. The byte
 * layout must round-trip bit-exactly through the primary toolkit's
 * reader.
 */

import { readFileSync, writeFileSync } from 'fs';

export const FSEQ_MAGIC = 'FSEQ';
export const FSEQ_VERSION = 1;
const HEADER_SIZE = 16;

export interface FeatureSequence {
  frames: number;
  dims: number;
  /** frames * dims float32 values, row-major */
  values: Float32Array;
}

export function encodeFseq(seq: FeatureSequence): Buffer {
  if (seq.values.length !== seq.frames * seq.dims) {
    throw new Error(
      `value count ${seq.values.length} != ${seq.frames}x${seq.dims}`,
    );
  }
  const buf = Buffer.alloc(HEADER_SIZE + 4 * seq.values.length);
  buf.write(FSEQ_MAGIC, 0, 'ascii');
  buf.writeUInt32LE(FSEQ_VERSION, 4);
  buf.writeUInt32LE(seq.frames, 8);
  buf.writeUInt32LE(seq.dims, 12);
  for (let i = 0; i < seq.values.length; i++) {
    buf.writeFloatLE(seq.values[i], HEADER_SIZE + 4 * i);
  }
  return buf;
}

export function decodeFseq(buf: Buffer, label = 'buffer'): FeatureSequence {
  if (buf.length < HEADER_SIZE) {
    throw new Error(`${label}: shorter than FSEQ header`);
  }
  if (buf.toString('ascii', 0, 4) !== FSEQ_MAGIC) {
    throw new Error(`${label}: bad magic`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== FSEQ_VERSION) {
    throw new Error(`${label}: unsupported FSEQ version ${version}`);
  }
  const frames = buf.readUInt32LE(8);
  const dims = buf.readUInt32LE(12);
  const expected = HEADER_SIZE + 4 * frames * dims;
  if (buf.length < expected) {
    throw new Error(
      `${label}: header declares ${frames}x${dims} values but payload is short`,
    );
  }
  const values = new Float32Array(frames * dims);
  for (let i = 0; i < values.length; i++) {
    values[i] = buf.readFloatLE(HEADER_SIZE + 4 * i);
  }
  return { frames, dims, values };
}

export function writeFseq(path: string, seq: FeatureSequence): void {
  writeFileSync(path, encodeFseq(seq));
}

export function readFseq(path: string): FeatureSequence {
  return decodeFseq(readFileSync(path), path);
}
