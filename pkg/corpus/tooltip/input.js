import React, { useState } from 'react';

function Tooltip({ text, children }) {
  const [visible, setVisible] = useState(false);

  const showTooltip = () => setVisible(!visible);

  return (
    <div className="tooltip-wrapper">
      <div className="tooltip-trigger" onClick={showTooltip}>
        {children}
      </div>
      {visible && (
        <span className="tooltip-text">{text}</span>
      )}
    </div>
  );
}

export default Tooltip;
