export {
  BoundFloatArray,
  BoundMaskArray,
  Shape4,
  ValidationError,
  bytesOf,
  qualityFraction,
  validateMask,
  validateValues,
} from "./buffers.js";
export { DecodedNpy, NpyDtype, decodeNpy, encodeNpy } from "./npy.js";
export { ZipEntry, crc32, readZip, writeZip } from "./zip.js";
export {
  EvaluationResult,
  HIRES_HW,
  MAX_ENSEMBLE,
  Subscores,
  ToolkitError,
  ToolkitOptions,
  TRACKS,
  TrackName,
  buildMinicubeArchive,
  buildPredictionArchive,
  evaluateDataset,
  runBaseline,
  scoreCube,
  toolkitVersion,
} from "./client.js";

export const PACKAGE_VERSION = "0.1.0";
