/** Bridge configuration: which models to run and how. */

export interface BridgeConfig {
  /** SSL encoder identifier ("stub" or a model id for the command engine) */
  sslModel: string;
  /** transformer layer to tap for frame features */
  sslLayer: number;
  /** depth of the encoder; sslLayer must not exceed it */
  sslDepth: number;
  deviceHint: 'cpu' | 'cuda';
  batchSize: number;
}

export const DEFAULT_CONFIG: BridgeConfig = {
  sslModel: 'stub',
  sslLayer: 12,
  sslDepth: 12,
  deviceHint: 'cpu',
  batchSize: 8,
};

export function validateConfig(cfg: BridgeConfig): BridgeConfig {
  if (!Number.isInteger(cfg.sslLayer) || cfg.sslLayer < 1
      || cfg.sslLayer > cfg.sslDepth) {
    throw new Error(
      `ssl layer ${cfg.sslLayer} outside model depth 1..${cfg.sslDepth}`,
    );
  }
  if (cfg.batchSize < 1) throw new Error('batch size must be >= 1');
  return cfg;
}
