/** JSONL sample manifests shared with the primary toolkit. */

import { readFileSync, writeFileSync } from 'fs';

export interface SampleRecord {
  utterance_id: string;
  label: string;
  domain: string;
  split: string;
  path: string;
  transcript_1?: string;
  transcript_2?: string;
}

const REQUIRED = ['utterance_id', 'label', 'domain', 'split', 'path'] as const;

export function parseRecord(line: string, where: string): SampleRecord {
  const raw = JSON.parse(line) as Record<string, unknown>;
  for (const key of REQUIRED) {
    if (typeof raw[key] !== 'string') {
      throw new Error(`${where}: missing or non-string field ${key}`);
    }
  }
  return raw as unknown as SampleRecord;
}

export function readManifest(path: string): SampleRecord[] {
  const text = readFileSync(path, 'utf-8');
  const records: SampleRecord[] = [];
  text.split('\n').forEach((line, i) => {
    const trimmed = line.trim();
    if (trimmed) records.push(parseRecord(trimmed, `${path}:${i + 1}`));
  });
  return records;
}

export function writeManifest(records: SampleRecord[], path: string): void {
  const sortKeys = (rec: SampleRecord) =>
    JSON.stringify(rec, Object.keys(rec).sort());
  writeFileSync(path, records.map(sortKeys).join('\n') + '\n', 'utf-8');
}
