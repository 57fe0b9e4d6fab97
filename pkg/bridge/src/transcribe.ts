#!/usr/bin/env node
/**
 * Transcription adapter honoring the generation loop's contract: the
 * 1-best hypothesis is printed as the final line of stdout; failures exit
 * nonzero with a message on stderr.
 *
 * Usage: transcribe [--engine stub] [--command "<template with {in_path}>"] <audio>
 */

import { AsrEngine, CommandAsr, StubAsr } from './engines.js';

export function main(argv: string[]): number {
  let engine: AsrEngine = new StubAsr();
  const rest: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === '--engine') {
      const name = argv[++i];
      if (name !== 'stub') {
        console.error(`unknown engine ${name}; use stub or --command`);
        return 2;
      }
    } else if (argv[i] === '--command') {
      engine = new CommandAsr(argv[++i]);
    } else {
      rest.push(argv[i]);
    }
  }
  if (rest.length !== 1) {
    console.error('usage: transcribe [--engine stub | --command TPL] <audio>');
    return 2;
  }
  try {
    // The hypothesis must be the final stdout line, even when empty.
    console.log(engine.transcribe(rest[0]));
    return 0;
  } catch (err) {
    console.error(String(err));
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith('transcribe.js')) {
  process.exit(main(process.argv.slice(2)));
}
