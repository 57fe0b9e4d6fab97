#!/usr/bin/env node
/**
 * Voice-cloning TTS adapter: writes 16 kHz mono WAV to --out and exits
 * nonzero on failure, matching the generation loop's command contract.
 *
 * Usage: synthesize --text <word> --voice <wav> --out <wav>
 *                   [--engine stub | --command "<template>"]
 */

import { CommandTts, StubTts, TtsEngine } from './engines.js';

export function main(argv: string[]): number {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith('--') || i + 1 >= argv.length) {
      console.error(`bad argument ${argv[i]}`);
      return 2;
    }
    args.set(argv[i].slice(2), argv[i + 1]);
  }
  const text = args.get('text');
  const voice = args.get('voice');
  const out = args.get('out');
  if (!text || !voice || !out) {
    console.error(
      'usage: synthesize --text <word> --voice <wav> --out <wav> ' +
        '[--engine stub | --command TPL]',
    );
    return 2;
  }
  let engine: TtsEngine = new StubTts();
  if (args.has('command')) {
    engine = new CommandTts(args.get('command')!);
  } else if (args.has('engine') && args.get('engine') !== 'stub') {
    console.error(`unknown engine ${args.get('engine')}; use stub or --command`);
    return 2;
  }
  try {
    engine.synthesize(text, voice, out);
    return 0;
  } catch (err) {
    console.error(String(err));
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith('synthesize.js')) {
  process.exit(main(process.argv.slice(2)));
}
